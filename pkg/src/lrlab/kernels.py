"""Hot loops with a numba backend and a pure-numpy fallback.

The backend is numba when it imports and ``LRLAB_NO_NUMBA`` is unset or
"0"; otherwise numpy.  Both implementations are always importable under
``*_numba`` / ``*_numpy`` names so tests and benchmarks can compare them.
"""
from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False


def backend() -> str:
    flag = os.environ.get("LRLAB_NO_NUMBA", "0").strip().lower()
    if _HAVE_NUMBA and flag in ("", "0", "false", "no"):
        return "numba"
    return "numpy"


def _njit(fn):
    if not _HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ------------------------------------------------------------ point counting


def _ap_batch_py(c3, c2, c1, c0, primes):
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for i in range(primes.shape[0]):
        p = primes[i]
        sq = np.zeros(p, dtype=np.int8)
        # y^2 = (y-1)^2 + (2y - 1), both terms kept reduced mod p
        y2 = 0
        inc = 1
        for y in range(1, p):
            y2 += inc
            if y2 >= p:
                y2 -= p
            sq[y2] = 1
            inc += 2
            if inc >= p:
                inc -= p
        # forward differences of r(x) = c3 x^3 + c2 x^2 + c1 x + c0 at x = 0
        d0 = c0[i] % p
        d1 = (c3[i] + c2[i] + c1[i]) % p
        d2 = (6 * c3[i] + 2 * c2[i]) % p
        d3 = (6 * c3[i]) % p
        s = 0
        for x in range(p):
            if d0 != 0:
                s += 2 * sq[d0] - 1
            d0 += d1
            if d0 >= p:
                d0 -= p
            d1 += d2
            if d1 >= p:
                d1 -= p
            d2 += d3
            if d2 >= p:
                d2 -= p
        out[i] = -s
    return out


ap_sum_numba = _njit(_ap_batch_py)


def ap_sum_numpy(c3, c2, c1, c0, primes):
    out = np.zeros(primes.shape[0], dtype=np.int64)
    for i, p in enumerate(primes.tolist()):
        x = np.arange(p, dtype=np.int64)
        sq = np.zeros(p, dtype=bool)
        sq[(x * x) % p] = True
        r = (((c3[i] * x + c2[i]) % p * x + c1[i]) % p * x + c0[i]) % p
        chi = np.where(r == 0, 0, np.where(sq[r], 1, -1))
        out[i] = -int(chi.sum())
    return out


def character_sums(coeffs, primes) -> np.ndarray:
    """-sum_x (f(x)/p) for the cubic f = coeffs (low->high) at each odd prime.

    With f(x) = 4x^3 + b2 x^2 + 2 b4 x + b6 this is a_p of the curve.
    """
    primes = np.asarray(primes, dtype=np.int64)
    if primes.size and (primes.min() < 3 or primes.max() > 3_000_000_000):
        raise ValueError("character sums need odd primes below 3e9")
    cols = [np.array([int(c) % int(p) for p in primes.tolist()], dtype=np.int64) for c in coeffs]
    c0, c1, c2, c3 = cols
    if backend() == "numba":
        return ap_sum_numba(c3, c2, c1, c0, primes)
    return ap_sum_numpy(c3, c2, c1, c0, primes)


# -------------------------------------------------------- GF(2) bit matrices


def _rank_batch_py(mats):
    b, r = mats.shape
    out = np.zeros(b, dtype=np.int64)
    for t in range(b):
        rows = mats[t].copy()
        rank = 0
        for i in range(r):
            piv = rows[i]
            if piv == 0:
                continue
            rank += 1
            # lowest set bit as pivot
            low = piv & (~piv + np.uint64(1))
            for j in range(i + 1, r):
                if rows[j] & low:
                    rows[j] ^= piv
        out[t] = rank
    return out


gf2_rank_batch_numba = _njit(_rank_batch_py)


def gf2_rank_batch_numpy(mats):
    m = np.array(mats, dtype=np.uint64, copy=True)
    b, r = m.shape
    rank = np.zeros(b, dtype=np.int64)
    for i in range(r):
        piv = m[:, i].copy()
        nz = piv != 0
        rank += nz
        low = piv & (~piv + np.uint64(1))
        if i + 1 < r:
            rest = m[:, i + 1 :]
            hit = (rest & low[:, None]) != 0
            m[:, i + 1 :] = np.where(hit, rest ^ piv[:, None], rest)
    return rank


def gf2_rank_batch(mats) -> np.ndarray:
    """Rank over GF(2) of each row-packed matrix in a (batch, rows) uint64 array."""
    mats = np.ascontiguousarray(mats, dtype=np.uint64)
    if mats.ndim != 2:
        raise ValueError("expected a (batch, rows) array")
    if mats.shape[0] == 0 or mats.shape[1] == 0:
        return np.zeros(mats.shape[0], dtype=np.int64)
    if backend() == "numba":
        return gf2_rank_batch_numba(mats)
    return gf2_rank_batch_numpy(mats)


# ------------------------------------------------- Galois ring GR(2^k, 2) lifts
# Elements are pairs (a, b) meaning a + b*w with w^2 = -w - 1.


LIFT_CAP = 1 << 14


def _lift_scan_py(q, k, alpha, beta, ainv, binv, constrained, start, stop):
    mask = (1 << k) - 1
    h = k - 1
    hmask = (1 << h) - 1
    cap = min(stop - start, 16384)
    out = np.zeros((cap, 8), dtype=np.int64)
    n = 0
    t = np.zeros(8, dtype=np.int64)
    r = np.zeros(8, dtype=np.int64)
    base = np.zeros(8, dtype=np.int64)
    tmp = np.zeros(8, dtype=np.int64)
    for idx in range(start, stop):
        v = idx
        for j in range(8):
            t[j] = ((v & hmask) << 1) & mask
            v >>= h
        t[0] = (t[0] + 1) & mask
        t[6] = (t[6] + 1) & mask
        # r = t^q by square and multiply
        for j in range(8):
            r[j] = 0
            base[j] = t[j]
        r[0] = 1
        r[6] = 1
        e = q
        while e > 0:
            if e & 1:
                _mat_mul(r, base, tmp, mask)
                for j in range(8):
                    r[j] = tmp[j]
            e >>= 1
            if e > 0:
                _mat_mul(base, base, tmp, mask)
                for j in range(8):
                    base[j] = tmp[j]
        if r[0] != t[0] or r[1] != t[1] or r[6] != t[6] or r[7] != t[7]:
            continue
        # conjugation by diag(alpha, beta) scales the off-diagonal entries
        c01a, c01b = _gr_mul(t[2], t[3], alpha[0], alpha[1], mask)
        c01a, c01b = _gr_mul(c01a, c01b, binv[0], binv[1], mask)
        c10a, c10b = _gr_mul(t[4], t[5], beta[0], beta[1], mask)
        c10a, c10b = _gr_mul(c10a, c10b, ainv[0], ainv[1], mask)
        if r[2] != c01a or r[3] != c01b or r[4] != c10a or r[5] != c10b:
            continue
        if constrained:
            da, db = _gr_mul(t[0], t[1], t[6], t[7], mask)
            oa, ob = _gr_mul(t[2], t[3], t[4], t[5], mask)
            if ((da - oa) & mask) != 1 or ((db - ob) & mask) != 0:
                continue
        if n < cap:
            for j in range(8):
                out[n, j] = t[j]
        n += 1
    return out[: min(n, cap)], n


def _gr_mul_py(a, b, c, d, mask):
    bd = b * d
    return (a * c - bd) & mask, (a * d + b * c - bd) & mask


def _mat_mul_py(x, y, z, mask):
    for i in range(2):
        for j in range(2):
            sa = 0
            sb = 0
            for m in range(2):
                ua, ub = _gr_mul(x[4 * i + 2 * m], x[4 * i + 2 * m + 1], y[4 * m + 2 * j], y[4 * m + 2 * j + 1], mask)
                sa += ua
                sb += ub
            z[4 * i + 2 * j] = sa & mask
            z[4 * i + 2 * j + 1] = sb & mask


if _HAVE_NUMBA:
    _gr_mul = numba.njit(cache=True)(_gr_mul_py)
    _mat_mul = numba.njit(cache=True)(_mat_mul_py)
    lift_scan_numba = numba.njit(cache=True)(_lift_scan_py)
else:  # pragma: no cover
    _gr_mul = _gr_mul_py
    _mat_mul = _mat_mul_py
    lift_scan_numba = _lift_scan_py


def _np_gr_mul(a, b, c, d, mask):
    bd = b * d
    return (a * c - bd) & mask, (a * d + b * c - bd) & mask


def _np_mat_mul(x, y, mask):
    # x, y: (n, 8) arrays, entry (i,j) at columns 4i+2j, 4i+2j+1
    z = np.empty_like(x)
    for i in range(2):
        for j in range(2):
            sa = 0
            sb = 0
            for m in range(2):
                ua, ub = _np_gr_mul(x[:, 4 * i + 2 * m], x[:, 4 * i + 2 * m + 1], y[:, 4 * m + 2 * j], y[:, 4 * m + 2 * j + 1], mask)
                sa = sa + ua
                sb = sb + ub
            z[:, 4 * i + 2 * j] = sa & mask
            z[:, 4 * i + 2 * j + 1] = sb & mask
    return z


def lift_scan_numpy(q, k, alpha, beta, ainv, binv, constrained, start, stop, chunk=1 << 18):
    mod = 1 << k
    mask = mod - 1
    h = k - 1
    hmask = (1 << h) - 1
    found = []
    for lo in range(start, stop, chunk):
        idx = np.arange(lo, min(stop, lo + chunk), dtype=np.int64)
        t = np.empty((idx.size, 8), dtype=np.int64)
        v = idx.copy()
        for j in range(8):
            t[:, j] = ((v & hmask) << 1) & mask
            v >>= h
        t[:, 0] = (t[:, 0] + 1) & mask
        t[:, 6] = (t[:, 6] + 1) & mask
        r = np.zeros_like(t)
        r[:, 0] = 1
        r[:, 6] = 1
        base = t.copy()
        e = q
        while e:
            if e & 1:
                r = _np_mat_mul(r, base, mask)
            base = _np_mat_mul(base, base, mask)
            e >>= 1
        c01 = _np_gr_mul(t[:, 2], t[:, 3], alpha[0], alpha[1], mask)
        c01 = _np_gr_mul(c01[0], c01[1], binv[0], binv[1], mask)
        c10 = _np_gr_mul(t[:, 4], t[:, 5], beta[0], beta[1], mask)
        c10 = _np_gr_mul(c10[0], c10[1], ainv[0], ainv[1], mask)
        ok = (
            (r[:, 0] == t[:, 0]) & (r[:, 1] == t[:, 1]) & (r[:, 6] == t[:, 6]) & (r[:, 7] == t[:, 7])
            & (r[:, 2] == c01[0]) & (r[:, 3] == c01[1]) & (r[:, 4] == c10[0]) & (r[:, 5] == c10[1])
        )
        if constrained:
            da, db = _np_gr_mul(t[:, 0], t[:, 1], t[:, 6], t[:, 7], mask)
            oa, ob = _np_gr_mul(t[:, 2], t[:, 3], t[:, 4], t[:, 5], mask)
            ok &= (((da - oa) & mask) == 1) & (((db - ob) & mask) == 0)
        found.append(t[ok])
    if not found:
        return np.zeros((0, 8), dtype=np.int64), 0
    allf = np.concatenate(found)
    return allf[:LIFT_CAP], allf.shape[0]


def lift_scan(q, k, alpha, beta, ainv, binv, constrained, start=0, stop=None) -> np.ndarray:
    """Matrices I + M, M with entries in 2*GR(2^k, 2), solving the tame relation.

    Candidates are indexed 0 .. 2^(8(k-1)) - 1; rows of the result hold the
    four entries as (a, b) pairs in row-major order.
    """
    total = 1 << (8 * (k - 1))
    stop = total if stop is None else stop
    args = (int(q), int(k), np.asarray(alpha, dtype=np.int64), np.asarray(beta, dtype=np.int64),
            np.asarray(ainv, dtype=np.int64), np.asarray(binv, dtype=np.int64), bool(constrained), int(start), int(stop))
    if backend() == "numba":
        sols, n = lift_scan_numba(*args)
    else:
        sols, n = lift_scan_numpy(*args)
    if n > LIFT_CAP:
        raise OverflowError(f"{n} solutions exceed the capture limit {LIFT_CAP}")
    return sols
