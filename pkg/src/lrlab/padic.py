"""Galois rings GR(p^k, d) and root counting in unramified p-adic rings.

An element of GR(p^k, d) = (Z/p^k)[x]/(m(x)) is a tuple of d residues mod
p^k, with m monic and irreducible mod p.  ``count_roots`` counts the roots
of an integer polynomial in the ring of integers of the unramified
extension of Q_p of degree d, working modulo p^k.
"""
from __future__ import annotations

from itertools import product
from typing import Sequence

from . import arith
from .errors import PrecisionError, PreconditionError

#: default moduli for the unramified extensions used in this package
STANDARD_MODULI = {
    (2, 1): (0, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
}


class GaloisRing:
    """Arithmetic in GR(p^k, d) with a fixed monic modulus."""

    def __init__(self, p: int, k: int, modulus: Sequence[int] | None = None):
        if k < 1:
            raise PreconditionError("precision must be >= 1")
        if modulus is None:
            modulus = STANDARD_MODULI.get((p, 1), (0, 1))
        modulus = tuple(int(c) for c in modulus)
        if modulus[-1] != 1:
            raise PreconditionError("modulus must be monic")
        self.p, self.k, self.modulus = p, k, modulus
        self.d = len(modulus) - 1
        self.q = p**k
        if self.d > 1 and len(arith.roots_mod_p(list(modulus), p)) > 0:
            raise PreconditionError("modulus is reducible mod p")

    def __repr__(self):
        return f"GaloisRing(p={self.p}, k={self.k}, d={self.d})"

    # construction
    def elt(self, coeffs: Sequence[int]) -> tuple:
        c = list(coeffs) + [0] * (self.d - len(coeffs))
        return tuple(x % self.q for x in c[: self.d])

    def from_int(self, n: int) -> tuple:
        return self.elt([n])

    @property
    def zero(self):
        return (0,) * self.d

    @property
    def one(self):
        return self.from_int(1)

    # ring operations
    def add(self, a, b):
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple((x - y) % self.q for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x % self.q for x in a)

    def scale(self, a, n):
        return tuple(x * n % self.q for x in a)

    def mul(self, a, b):
        d, q, m = self.d, self.q, self.modulus
        prod_ = [0] * (2 * d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod_[i + j] += x * y
        for i in range(2 * d - 2, d - 1, -1):
            c = prod_[i]
            if c:
                for j in range(d):
                    prod_[i - d + j] -= c * m[j]
        return tuple(x % q for x in prod_[:d])

    def pow(self, a, e: int):
        r = self.one
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def residue(self, a) -> tuple:
        return tuple(x % self.p for x in a)

    def is_unit(self, a) -> bool:
        return any(x % self.p for x in a)

    def valuation(self, a) -> int:
        """Minimum p-adic valuation of the coordinates (k if zero)."""
        v = self.k
        for x in a:
            if x:
                v = min(v, arith.valuation(x, self.p))
        return v

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("non-unit in Galois ring")
        # the unit group has order (p^d - 1) p^{d(k-1)}
        return self.pow(a, (self.p**self.d - 1) * self.p ** (self.d * (self.k - 1)) - 1)

    def residues(self):
        """Representatives of the residue field F_{p^d}."""
        for c in product(range(self.p), repeat=self.d):
            yield tuple(c)

    # polynomials with ring coefficients, lowest degree first
    def poly_eval(self, f, x):
        acc = self.zero
        for c in reversed(f):
            acc = self.add(self.mul(acc, x), c)
        return acc

    def poly_shift(self, f, r):
        """Coefficients of g(y) = f(r + p*y)."""
        n = len(f)
        # Taylor shift by r, then scale coefficient i by p^i
        g = list(f)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                g[j] = self.add(g[j], self.mul(r, g[j + 1]))
        return [self.scale(c, self.p**i) for i, c in enumerate(g)]


def _count(ring: GaloisRing, f: list, prec: int, depth: int) -> int:
    # f is primitive and known modulo p^prec
    p = ring.p
    red = [ring.residue(c) for c in f]
    while red and not any(red[-1]):
        red.pop()
    if len(red) <= 1:
        return 0
    total = 0
    if ring.d == 1:
        cand = [(r,) for r in arith.roots_mod_p([c[0] for c in red], p)]
    else:
        small = GaloisRing(p, 1, ring.modulus)
        cand = [r for r in small.residues() if not any(small.poly_eval(red, r))]
    small = GaloisRing(p, 1, ring.modulus)
    dred = [small.scale(c, i) for i, c in enumerate(red)][1:]
    for r in cand:
        if small.is_unit(small.poly_eval(dred, r)):
            total += 1  # simple root, Hensel lifts uniquely
            continue
        g = ring.poly_shift(f, ring.elt(r))
        v = min(ring.valuation(c) for c in g)
        if v >= prec:
            raise PrecisionError("working precision exhausted while separating roots")
        g = [tuple((x // p**v) for x in c) for c in g]
        total += _count(ring, g, prec - v, depth + 1)
    return total


def count_roots(f: Sequence[int], p: int, d: int = 1, k: int = 64, modulus: Sequence[int] | None = None) -> int:
    """Number of roots of a separable integer polynomial in Z_p[zeta], zeta of degree d.

    Raises PrecisionError when p^k is not enough to separate the roots.
    """
    if modulus is None:
        modulus = STANDARD_MODULI.get((p, d))
        if modulus is None:
            if d != 1:
                raise PreconditionError(f"no standard modulus for p={p}, d={d}")
            modulus = (0, 1)
    ring = GaloisRing(p, k, modulus)
    coeffs = [ring.from_int(c) for c in f]
    content = min(ring.valuation(c) for c in coeffs)
    if content >= k:
        raise PrecisionError("polynomial vanishes at working precision")
    coeffs = [tuple(x // p**content for x in c) for c in coeffs]
    return _count(ring, coeffs, k - content, 0)
