"""Compare the numba kernels with their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json]

Each kernel is run once untimed (numba compiles on first call), then the
best of ``--repeat`` runs is reported.  Outputs of both backends are
compared before timing.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from lrlab import arith, kernels, liftrig


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    primes = np.array([p for p in arith.primes_up_to(20_000).tolist() if p > 3], dtype=np.int64)
    cubic = [-79, -40, -4, 4]  # b6 + 2 b4 x + b2 x^2 + 4 x^3 for 11a1
    cols = [np.array([c % int(p) for p in primes.tolist()], dtype=np.int64) for c in cubic]
    c0, c1, c2, c3 = cols
    yield ("character sums, primes < 2e4",
           lambda: kernels.ap_sum_numba(c3, c2, c1, c0, primes),
           lambda: kernels.ap_sum_numpy(c3, c2, c1, c0, primes))

    rng = np.random.default_rng(0)
    mats = rng.integers(0, 1 << 12, size=(200_000, 10), dtype=np.uint64)
    yield ("GF(2) rank, 2e5 matrices 10x12",
           lambda: kernels.gf2_rank_batch_numba(mats),
           lambda: kernels.gf2_rank_batch_numpy(mats))

    sig = liftrig.standard_sigma(3, 3)
    R = liftrig.ring(3)
    args = (3, 3, np.asarray(sig.alpha), np.asarray(sig.beta), np.asarray(R.inv(sig.alpha)),
            np.asarray(R.inv(sig.beta)), False, 0, 1 << 16)
    yield ("tame lift scan, (q, k) = (3, 3)",
           lambda: kernels.lift_scan_numba(*args)[0],
           lambda: kernels.lift_scan_numpy(*args)[0])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    rows = []
    for name, fast, slow in cases():
        a, b = np.asarray(fast()), np.asarray(slow())
        if a.shape != b.shape or not np.array_equal(np.sort(a, axis=0), np.sort(b, axis=0)):
            raise SystemExit(f"{name}: backends disagree")
        tn, tp = best_of(fast, args.repeat), best_of(slow, args.repeat)
        rows.append({"kernel": name, "numba_s": round(tn, 4), "numpy_s": round(tp, 4),
                     "speedup": round(tp / tn, 1) if tn else None})
    if args.json:
        print(json.dumps(rows, indent=2))
        return
    w = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel'.ljust(w)}  {'numba s':>9}  {'numpy s':>9}  speedup")
    for r in rows:
        print(f"{r['kernel'].ljust(w)}  {r['numba_s']:>9.4f}  {r['numpy_s']:>9.4f}  {r['speedup']:>6}x")


if __name__ == "__main__":
    main()
