"""Weight-2 modular symbols for Gamma0(N), N squarefree, plus quotient.

Offline helper used to build the newform fixtures shipped with the
package.  Exact linear algebra over Q through python-flint.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, prod

import flint


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            n //= d
            if n % d == 0:
                raise ValueError("level must be squarefree")
        d += 1
    if n > 1:
        out.append(n)
    return out


def primes_upto(n):
    sieve = bytearray([1]) * (n + 1)
    sieve[:2] = b"\x00\x00"
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i in range(n + 1) if sieve[i]]


class P1List:
    """P^1(Z/N) for squarefree N, indexed through CRT digits."""

    def __init__(self, N):
        self.N = N
        self.primes = _prime_factors(N) if N > 1 else []
        self.count = prod(p + 1 for p in self.primes)
        self._inv = {p: [0] + [pow(x, -1, p) for x in range(1, p)] for p in self.primes}
        self.reps = [self._rep(i) for i in range(self.count)]

    def index(self, c, d):
        idx = 0
        for p in self.primes:
            cp, dp = c % p, d % p
            if cp == 0:
                if dp == 0:
                    return -1
                j = p
            else:
                j = dp * self._inv[p][cp] % p
            idx = idx * (p + 1) + j
        return idx

    def _rep(self, idx):
        digits = []
        for p in reversed(self.primes):
            digits.append(idx % (p + 1))
            idx //= p + 1
        digits.reverse()
        c = d = 0
        for p, j in zip(self.primes, digits):
            cp, dp = (0, 1) if j == p else (1, j)
            m = self.N // p
            e = m * pow(m, -1, p)
            c += cp * e
            d += dp * e
        return c % self.N if self.N > 1 else 0, d % self.N if self.N > 1 else 1


def heilbronn_cremona(p):
    if p == 2:
        return [(1, 0, 0, 2), (2, 0, 0, 1), (2, 1, 0, 1), (1, 0, 1, 2)]
    out = [(1, 0, 0, p)]
    for r in range(-(p // 2), p // 2 + 1):
        x1, x2, y1, y2 = p, -r, 0, 1
        a, b = -p, r
        out.append((x1, x2, y1, y2))
        while b:
            q = a / b
            q = int(q + 0.5) if q >= 0 else -int(-q + 0.5)
            a, b = -b, a - b * q
            x1, x2 = x2, q * x2 - x1
            y1, y2 = y2, q * y2 - y1
            out.append((x1, x2, y1, y2))
    return out


def heilbronn_merel(n):
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 2 - a):
            for b in range(a):
                r = a * d - n
                if b == 0:
                    if r == 0:
                        out.extend((a, 0, c, d) for c in range(d))
                    continue
                if r >= 0 and r % b == 0:
                    c = r // b
                    if c < d:
                        out.append((a, b, c, d))
    return out


def _rref_rows(mat):
    """RREF of an fmpq_mat; returns (rref, pivot columns, rank)."""
    R, rank = mat.rref()
    pivots = []
    for i in range(rank):
        for j in range(R.ncols()):
            if R[i, j] != 0:
                pivots.append(j)
                break
    return R, pivots, rank


def left_kernel(A):
    """Basis (rows, RREF) of {v : v A = 0} for an fmpq_mat A."""
    At = A.transpose()
    R, pivots, rank = _rref_rows(At)
    n = At.ncols()
    free = [j for j in range(n) if j not in set(pivots)]
    rows = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -Fraction(int(R[i, f].p), int(R[i, f].q))
        rows.append(v)
    if not rows:
        return flint.fmpq_mat(0, n)
    K = flint.fmpq_mat(len(rows), n, [flint.fmpq(x.numerator, x.denominator) for r in rows for x in r])
    return _rref_rows(K)[0]


def restrict(basis, T):
    """Matrix of T (row convention) on the row space of RREF ``basis``."""
    _, pivots, rank = _rref_rows(basis)
    img = basis * T
    return flint.fmpq_mat(rank, rank, [img[i, j] for i in range(rank) for j in pivots])


def compose_basis(sub, basis):
    """Rows of ``sub`` (coords w.r.t. ``basis``) expressed in ambient coords, RREF."""
    if sub.nrows() == 0:
        return flint.fmpq_mat(0, basis.ncols())
    return _rref_rows(sub * basis)[0]


class ModularSymbols:
    def __init__(self, N, sign=1):
        self.N = N
        self.P1 = P1List(N)
        n = self.P1.count
        idx = self.P1.index
        reps = self.P1.reps
        sig = [idx(d, -c) for c, d in reps]
        eta = [idx(-c, d) for c, d in reps]
        tau = [idx(d, -c - d) for c, d in reps]
        tau2 = [idx(-c - d, c) for c, d in reps]
        # two-term relations: x = -x sigma, x = sign * x eta
        parent = list(range(n))
        coef = [1] * n  # x = coef * [root]
        zero = [False] * n

        def find(x):
            s = 1
            while parent[x] != x:
                s *= coef[x]
                x = parent[x]
            return x, s

        def union(x, y, s):  # x = s * y
            rx, sx = find(x)
            ry, sy = find(y)
            # x = sx rx, y = sy ry  =>  sx rx = s sy ry
            if rx == ry:
                if sx != s * sy:
                    zero[rx] = True
                return
            parent[rx] = ry
            coef[rx] = s * sy * sx
            if zero[rx]:
                zero[ry] = True

        for x in range(n):
            union(x, sig[x], -1)
            union(x, eta[x], sign)
        gen_of = [None] * n
        roots = sorted({find(x)[0] for x in range(n)})
        live = [r for r in roots if not zero[r]]
        col = {r: i for i, r in enumerate(live)}
        for x in range(n):
            r, s = find(x)
            gen_of[x] = None if zero[r] else (col[r], s)
        ng = len(live)
        rels = set()
        for x in range(n):
            row = {}
            for y in (x, tau[x], tau2[x]):
                g = gen_of[y]
                if g is None:
                    continue
                row[g[0]] = row.get(g[0], 0) + g[1]
            row = tuple(sorted((k, v) for k, v in row.items() if v))
            if row:
                rels.add(row)
        rels = sorted(rels)
        R = flint.fmpq_mat(max(len(rels), 1), ng)
        for i, row in enumerate(rels):
            for k, v in row:
                R[i, k] = v
        Rr, pivots, rank = _rref_rows(R)
        pivset = set(pivots)
        free = [j for j in range(ng) if j not in pivset]
        fcol = {j: i for i, j in enumerate(free)}
        self.dim = len(free)
        # generator j -> sparse vector in basis of free generators
        gen_vec = []
        piv_row = {pc: i for i, pc in enumerate(pivots)}
        for j in range(ng):
            if j in fcol:
                gen_vec.append({fcol[j]: Fraction(1)})
            else:
                i = piv_row[j]
                v = {}
                for f in free:
                    e = Rr[i, f]
                    if e != 0:
                        v[fcol[f]] = -Fraction(int(e.p), int(e.q))
                gen_vec.append(v)
        self.sym_vec = []
        for x in range(n):
            g = gen_of[x]
            if g is None:
                self.sym_vec.append({})
            else:
                s = g[1]
                self.sym_vec.append({k: s * v for k, v in gen_vec[g[0]].items()})
        # a representative symbol for each free generator
        self.basis_sym = [live[j] for j in free]
        # boundary map -> cusp classes (divisors of N)
        divs = sorted({gcd(c, N) if N > 1 else 1 for c in range(N)} | {N})
        dcol = {d: i for i, d in enumerate(divs)}
        B = flint.fmpq_mat(self.dim, len(divs))
        for i, x in enumerate(self.basis_sym):
            c, d = reps[x]
            B[i, dcol[gcd(c, N)]] += 1
            B[i, dcol[gcd(d, N)]] -= 1
        self.cuspidal = left_kernel(B)
        self._hecke = {}

    def hecke_ambient(self, p):
        if p in self._hecke:
            return self._hecke[p]
        mats = heilbronn_merel(p) if self.N % p == 0 else heilbronn_cremona(p)
        idx = self.P1.index
        T = flint.fmpq_mat(self.dim, self.dim)
        for i, x in enumerate(self.basis_sym):
            c, d = self.P1.reps[x]
            acc = {}
            for a, b, cc, dd in mats:
                y = idx(c * a + d * cc, c * b + d * dd)
                if y < 0:
                    continue
                for k, v in self.sym_vec[y].items():
                    acc[k] = acc.get(k, 0) + v
            for k, v in acc.items():
                if v:
                    T[i, k] = flint.fmpq(v.numerator, v.denominator)
        self._hecke[p] = T
        return T

    def hecke_cuspidal(self, p):
        return restrict(self.cuspidal, self.hecke_ambient(p))



def _identity(n):
    I = flint.fmpq_mat(n, n)
    for i in range(n):
        I[i, i] = 1
    return I


def poly_at_matrix(poly, A):
    n = A.nrows()
    R = flint.fmpq_mat(n, n)
    for c in reversed([int(c) for c in poly.coeffs()]):
        R = R * A + _identity(n) * c
    return R


def common_left_kernel(mats, dim):
    if not mats:
        return _identity(dim)
    big = flint.fmpq_mat(dim, dim * len(mats))
    for k, A in enumerate(mats):
        for i in range(dim):
            for j in range(dim):
                big[i, k * dim + j] = A[i, j]
    return left_kernel(big)


def sign_spaces(M):
    """{eps: rows in cuspidal coordinates} with eps the tuple of U_p eigenvalues."""
    from itertools import product

    s = M.cuspidal.nrows()
    primes = M.P1.primes
    Us = {p: M.hecke_cuspidal(p) for p in primes}
    I = _identity(s)
    out = {}
    for eps in product((1, -1), repeat=len(primes)):
        V = common_left_kernel([Us[p] - I * e for p, e in zip(primes, eps)], s)
        if V.nrows():
            out[eps] = V
    return out


def _squarefree(poly):
    return all(e == 1 for _, e in poly.factor()[1])


def _generators(good):
    for p in good[:6]:
        yield ((1, p),)
    for i, p in enumerate(good[:5]):
        for q in good[i + 1 : 6]:
            for c in (1, 2, 3, -1):
                yield ((1, p), (c, q))


def _combo_matrix(M, combo, V):
    A = None
    for c, p in combo:
        B = restrict(V, M.hecke_cuspidal(p)) * c
        A = B if A is None else A + B
    return A


def split_orbits(M, V):
    """Split a Hecke-stable subspace V (cuspidal coords) into Galois orbits."""
    d = V.nrows()
    good = [p for p in primes_upto(100) if M.N % p]
    for combo in _generators(good):
        A = _combo_matrix(M, combo, V)
        cp = A.charpoly()
        fz = flint.fmpz_poly([int(c) for c in cp.coeffs()])
        if not _squarefree(fz):
            continue
        parts = []
        for h, _ in fz.factor()[1]:
            W = left_kernel(poly_at_matrix(h, A))
            parts.append(compose_basis(W, V))
        return parts
    raise RuntimeError("could not separate orbits at level %d" % M.N)


def _frac(x):
    return Fraction(int(x.p), int(x.q))


def krylov_coordinates(M, W, gen_combo, primes):
    """Power-basis coordinates of Hecke eigenvalues on one Galois orbit.

    Returns (charpoly coefficients low->high, {p: [Fraction]*dim}).
    The generator's eigenvalue theta has the returned minimal polynomial and
    b_p = sum c_i theta^i.
    """
    d = W.nrows()
    A = _combo_matrix(M, gen_combo, W)
    cp = [int(c) for c in A.charpoly().coeffs()]
    for start in range(d + 3):
        v = flint.fmpq_mat(1, d)
        if start < d:
            v[0, start] = 1
        else:
            for j in range(d):
                v[0, j] = (j * 7 + start * 3) % 5 - 2
        rows = [v]
        for _ in range(d - 1):
            rows.append(rows[-1] * A)
        K = flint.fmpq_mat(d, d, [r[0, j] for r in rows for j in range(d)])
        if K.rank() == d:
            break
    else:
        raise RuntimeError("no cyclic vector")
    Kinv = K.inv()
    out = {}
    for p in primes:
        P = restrict(W, M.hecke_cuspidal(p))
        c = (v * P) * Kinv
        out[p] = [_frac(c[0, j]) for j in range(d)]
    return cp, out
