"""Build the offline newform and curve fixtures shipped in src/lrlab/data/lmfdb.

Each fixture is stored exactly as the LMFDB API would answer the same
request, under the same content-addressed key the client uses, so offline
runs and live runs go through one code path.  Newform data is computed
here from weight-2 modular symbols (python-flint), since the sandbox that
produced the package had no network access.

    python3 tools/build_fixtures.py [--levels 11,77,...] [--out DIR]
"""
from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from math import lcm
from pathlib import Path

import flint

sys.path.insert(0, str(Path(__file__).resolve().parent))
sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import modsym  # noqa: E402
from lrlab import lmfdb  # noqa: E402
from lrlab.arith import factorize  # noqa: E402
from lrlab.curves import WeierstrassCurve  # noqa: E402

LEVELS = (11, 35, 77, 143, 187, 665, 805, 1001, 1085, 1463)
CURVES = {
    "11a1": (0, -1, 1, -10, -20),
    "35a1": (0, 1, 1, 9, 1),
    "37a1": (0, 0, 1, -1, 0),
    "2351a1": (1, 0, 1, -5, -5),
    "25861i1": (1, 1, 1, -17, 30),
}
MAXP = 97
NMAX = 100
SOURCE = "computed locally from weight-2 modular symbols (tools/build_fixtures.py)"


# ------------------------------------------------------------ number field


def _mulmod(a, b, f):
    """Product in Q[x]/(f), f monic given low -> high."""
    d = len(f) - 1
    out = [Fraction(0)] * (2 * d - 1 if d else 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    for k in range(len(out) - 1, d - 1, -1):
        c = out[k]
        if c:
            for j in range(d):
                out[k - d + j] -= c * f[j]
        out[k] = Fraction(0)
    return out[:d]


def _power_traces(f, count):
    """Tr(theta^i) for i < count by Newton's identities."""
    d = len(f) - 1
    e = [Fraction(f[d - k]) for k in range(d + 1)]  # x^d + e1 x^(d-1) + ...
    s = [Fraction(d)]
    for i in range(1, count):
        acc = Fraction(0)
        for k in range(1, min(i, d) + 1):
            if k < i:
                acc -= e[k] * s[i - k]
            else:
                acc -= k * e[k]
        s.append(acc)
    return s


def _trace(x, ptr):
    return sum(c * ptr[i] for i, c in enumerate(x))


def _eigen_traces(f, ap, level):
    """Traces of a_n, n = 1..NMAX, from the a_p as elements of Q[x]/(f)."""
    d = len(f) - 1
    one = [Fraction(1)] + [Fraction(0)] * (d - 1)
    a = {1: one}
    for n in range(2, NMAX + 1):
        p = min(factorize(n))
        k = factorize(n)[p]
        m = n // p**k
        if m > 1:
            a[n] = _mulmod(a[p**k], a[m], f)
            continue
        if k == 1:
            a[n] = list(ap[p])
        elif level % p == 0:
            a[n] = _mulmod(a[p ** (k - 1)], ap[p], f)
        else:
            x = _mulmod(ap[p], a[p ** (k - 1)], f)
            a[n] = [u - p * v for u, v in zip(x, a[p ** (k - 2)])]
    ptr = _power_traces(f, d)
    out = []
    for n in range(1, NMAX + 1):
        t = _trace(a[n], ptr)
        assert t.denominator == 1
        out.append(int(t))
    return out


# --------------------------------------------------------------- newforms


def _orbits(M, V):
    good = [p for p in modsym.primes_upto(100) if M.N % p]
    for combo in modsym._generators(good):
        A = modsym._combo_matrix(M, combo, V)
        fz = flint.fmpz_poly([int(c) for c in A.charpoly().coeffs()])
        if not modsym._squarefree(fz):
            continue
        return [modsym.compose_basis(modsym.left_kernel(modsym.poly_at_matrix(h, A)), V) for h, _ in fz.factor()[1]]
    raise RuntimeError(f"could not separate orbits at level {M.N}")


def _orbit_data(M, W, primes):
    """(field poly, {p: power-basis coords}) for one orbit, preferring odd denominators."""
    d = W.nrows()
    if d == 1:
        ap = {}
        for p in primes:
            P = modsym.restrict(W, M.hecke_cuspidal(p))
            ap[p] = [modsym._frac(P[0, 0])]
        return [0, 1], ap
    good = [p for p in modsym.primes_upto(100) if M.N % p]
    fallback = None
    for combo in modsym._generators(good):
        A = modsym._combo_matrix(M, combo, W)
        fz = flint.fmpz_poly([int(c) for c in A.charpoly().coeffs()])
        if not modsym._squarefree(fz):
            continue
        cp, ap = modsym.krylov_coordinates(M, W, combo, primes)
        if all(c.denominator % 2 for v in ap.values() for c in v):
            return cp, ap
        if fallback is None:
            fallback = (cp, ap)
    if fallback is None:
        raise RuntimeError(f"no primitive generator on an orbit at level {M.N}")
    return fallback


def _hnf_rows(vecs, d):
    den = lcm(*[c.denominator for v in vecs for c in v])
    m = flint.fmpz_mat(len(vecs), d, [int(c * den) for v in vecs for c in v]).hnf()
    rows = [[int(m[i, j]) for j in range(d)] for i in range(m.nrows())]
    return [r for r in rows if any(r)], den


def hecke_order(f, ap):
    """Z-basis (power-basis coordinates) of the order generated by the a_p."""
    d = len(f) - 1
    one = [Fraction(1)] + [Fraction(0)] * (d - 1)
    gens = [one] + [list(v) for v in ap.values()]
    rows, den = _hnf_rows(gens, d)
    while True:
        basis = [[Fraction(c, den) for c in r] for r in rows]
        prods = basis + [_mulmod(x, y, f) for i, x in enumerate(basis) for y in basis[i:]]
        new, nden = _hnf_rows(prods, d)
        if len(new) == d and [[Fraction(c, nden) for c in r] for r in new] == basis:
            return basis
        rows, den = new, nden


def _solve(basis, x):
    d = len(basis)
    A = flint.fmpq_mat(d, d, [flint.fmpq(c.numerator, c.denominator) for r in basis for c in r])
    b = flint.fmpq_mat(1, d, [flint.fmpq(c.numerator, c.denominator) for c in x])
    sol = b * A.inv()
    out = [modsym._frac(sol[0, j]) for j in range(d)]
    assert all(c.denominator == 1 for c in out)
    return [int(c) for c in out]


def _letters(i):
    s = ""
    while True:
        s = chr(ord("a") + i % 26) + s
        i //= 26
        if i == 0:
            return s


def newforms_at(level):
    M = modsym.ModularSymbols(level, sign=1)
    primes = [p for p in modsym.primes_upto(MAXP)]
    forms = []
    for eps, V in sorted(modsym.sign_spaces(M).items()):
        for W in _orbits(M, V):
            f, ap = _orbit_data(M, W, primes)
            traces = _eigen_traces(f, ap, level)
            d = len(f) - 1
            basis = hecke_order(f, ap)
            dens = [lcm(*[c.denominator for c in b]) for b in basis]
            nums = [[int(c * D) for c in b] for b, D in zip(basis, dens)]
            vecs = [_solve(basis, ap[p]) for p in primes]
            al = [[q, -e] for q, e in zip(M.P1.primes, eps)]
            forms.append({"dim": d, "field_poly": [int(c) for c in f], "traces": traces,
                          "atkin_lehner_eigenvals": al, "nums": nums, "dens": dens, "vecs": vecs})
    forms.sort(key=lambda g: (g["dim"], g["traces"]))
    nf_rows, hecke = [], {}
    for i, g in enumerate(forms):
        label = f"{level}.2.a.{_letters(i)}"
        nf_rows.append({"label": label, "level": level, "weight": 2, "dim": g["dim"],
                        "field_poly": g["field_poly"], "traces": g["traces"],
                        "atkin_lehner_eigenvals": g["atkin_lehner_eigenvals"]})
        hecke[label] = {"label": label, "field_poly": g["field_poly"],
                        "hecke_ring_numerators": g["nums"],
                        "hecke_ring_denominators": g["dens"], "ap": g["vecs"], "maxp": MAXP}
    return nf_rows, hecke


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default=",".join(map(str, LEVELS)))
    ap.add_argument("--out", default=str(lmfdb.FIXTURE_DIR))
    args = ap.parse_args(argv)
    cache = lmfdb.Cache(args.out)
    for label, ainvs in CURVES.items():
        E = WeierstrassCurve.from_ainvs(ainvs, label=label)
        rec = {"Clabel": label, "ainvs": list(ainvs), "conductor": E.conductor}
        cache.put("/api/ec_curvedata/", {"Clabel": label, "_format": "json"}, {"data": [rec]}, SOURCE)
    for level in (int(x) for x in args.levels.split(",")):
        t0 = time.time()
        rows, hecke = newforms_at(level)
        cache.put("/api/mf_newforms/", {"level": f"i{level}", "weight": "i2", "_format": "json"},
                  {"data": rows}, SOURCE)
        for label, h in hecke.items():
            cache.put("/api/mf_hecke_nf/", {"label": label, "_format": "json"}, {"data": [h]}, SOURCE)
        dims = [r["dim"] for r in rows]
        print(f"level {level}: {len(rows)} newforms, dims {dims}, {time.time() - t0:.1f}s", flush=True)


if __name__ == "__main__":
    main()
