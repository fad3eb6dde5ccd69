"""Elliptic curves over Q in long Weierstrass form.

Invariants, Frobenius traces a_p by two independent point-counting paths,
and the local reduction data from Tate's algorithm (all primes, p = 2 and
p = 3 included).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from . import arith, kernels
from .errors import ConsistencyError, PreconditionError

COUNT_BOUND = 10**6


@dataclass(frozen=True)
class Invariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    disc: int

    @property
    def j(self) -> Fraction:
        return Fraction(self.c4**3, self.disc)


@dataclass(frozen=True)
class LocalData:
    """Reduction data at one prime, computed on a model minimal at p."""

    p: int
    kind: str  # good | split | nonsplit | additive
    kodaira: str
    conductor_exponent: int
    component_group_order: int  # geometric: components of the special fibre
    tamagawa: int
    disc_valuation: int
    minimal_model: tuple[int, int, int, int, int]

    @property
    def is_multiplicative(self) -> bool:
        return self.kind in ("split", "nonsplit")


def _invariants(a1, a2, a3, a4, a6) -> Invariants:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return Invariants(b2, b4, b6, b8, c4, c6, disc)


def transform(a, r=0, s=0, t=0, u=1):
    """a-invariants after x = u^2 x' + r, y = u^3 y' + s u^2 x' + t."""
    a1, a2, a3, a4, a6 = a
    n1 = a1 + 2 * s
    n2 = a2 - s * a1 + 3 * r - s * s
    n3 = a3 + r * a1 + 2 * t
    n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t
    n6 = a6 + r * a4 + r * r * a2 + r**3 - t * a3 - t * t - r * t * a1
    out = []
    for c, w in ((n1, 1), (n2, 2), (n3, 3), (n4, 4), (n6, 6)):
        d = u**w
        if c % d:
            raise PreconditionError("scaling does not give an integral model")
        out.append(c // d)
    return tuple(out)


@dataclass(frozen=True)
class WeierstrassCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with integer a_i."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    label: str | None = None

    def __post_init__(self):
        for name in ("a1", "a2", "a3", "a4", "a6"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise PreconditionError(f"{name} must be an integer")
            object.__setattr__(self, name, int(v))
        if self.invariants.disc == 0:
            raise PreconditionError("singular Weierstrass equation (discriminant 0)")

    @classmethod
    def from_ainvs(cls, ainvs: Sequence[int], label: str | None = None) -> "WeierstrassCurve":
        if len(ainvs) != 5:
            raise PreconditionError("need five a-invariants")
        return cls(*[int(x) for x in ainvs], label=label)

    @classmethod
    def parse(cls, text: str) -> "WeierstrassCurve":
        """Parse "a1,a2,a3,a4,a6" (brackets and spaces allowed)."""
        body = text.strip().strip("[]()")
        parts = [x for x in body.replace(" ", "").split(",") if x]
        try:
            vals = [int(x) for x in parts]
        except ValueError as exc:
            raise PreconditionError(f"cannot parse a-invariants from {text!r}") from exc
        return cls.from_ainvs(vals)

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @cached_property
    def invariants(self) -> Invariants:
        return _invariants(*self.ainvs)

    @property
    def disc(self) -> int:
        return self.invariants.disc

    def name(self) -> str:
        return self.label or "[" + ",".join(map(str, self.ainvs)) + "]"

    # ---------------------------------------------------------- reduction

    @cached_property
    def disc_factorization(self) -> dict[int, int]:
        return arith.factorize(self.disc)

    def local_data(self, p: int) -> LocalData:
        cache = self.__dict__.setdefault("_local_cache", {})
        if p not in cache:
            cache[p] = tate(self.ainvs, p)
        return cache[p]

    def reduction_type(self, p: int) -> LocalData:
        return self.local_data(p)

    def bad_primes(self) -> list[int]:
        return [p for p in self.disc_factorization if self.local_data(p).kind != "good"]

    def conductor_factorization(self) -> dict[int, int]:
        out = {}
        for p in self.disc_factorization:
            f = self.local_data(p).conductor_exponent
            if f:
                out[p] = f
        return out

    @cached_property
    def conductor(self) -> int:
        return math.prod(p**e for p, e in self.conductor_factorization().items())

    # ------------------------------------------------------------- traces

    def ap(self, p: int) -> int:
        """a_p = p + 1 - #E(F_p), counted on a model minimal at p."""
        p = int(p)
        if p > COUNT_BOUND:
            raise PreconditionError(f"p = {p} exceeds the point-counting bound {COUNT_BOUND}")
        if not arith.is_prime(p):
            raise PreconditionError(f"{p} is not prime")
        model = self.ainvs if self.disc % p else self.local_data(p).minimal_model
        if p <= 3:
            return p + 1 - count_points_naive(model, p)
        return int(ap_many(model, [p])[0])

    def aplist(self, bound: int) -> dict[int, int]:
        """a_p for every prime p <= bound."""
        ps = [int(p) for p in arith.primes_up_to(bound)]
        out = {}
        fast = [p for p in ps if p > 3 and self.disc % p]
        if fast:
            vals = ap_many(self.ainvs, fast)
            out.update(zip(fast, (int(v) for v in vals)))
        for p in ps:
            if p not in out:
                out[p] = self.ap(p)
        return dict(sorted(out.items()))


def count_points_naive(a, p: int) -> int:
    """#E(F_p) including the point at infinity, by enumerating (x, y)."""
    a1, a2, a3, a4, a6 = (c % p for c in a)
    n = 1
    for x in range(p):
        rhs = (x**3 + a2 * x * x + a4 * x + a6) % p
        for y in range(p):
            if (y * y + a1 * x * y + a3 * y - rhs) % p == 0:
                n += 1
    return n


def _two_torsion_quartic(a):
    inv = _invariants(*a)
    # (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    return (inv.b6, 2 * inv.b4, inv.b2, 4)


def ap_many(a, primes: Iterable[int]) -> np.ndarray:
    """a_p at primes p >= 5 of good reduction via the accelerated character sum."""
    return kernels.character_sums(_two_torsion_quartic(a), list(primes))


def ap_legendre(a, p: int) -> int:
    """a_p from Legendre symbols of the completed-square cubic (pure Python)."""
    f = _two_torsion_quartic(a)
    s = 0
    for x in range(p):
        s += arith.legendre(arith.peval(f, x, p), p)
    return -s


def cross_check_ap(curve: WeierstrassCurve, primes: Iterable[int]) -> None:
    """Raise ConsistencyError if the two counting paths disagree."""
    for p in primes:
        if p < 5 or curve.disc % p == 0:
            continue
        a, b = curve.ap(p), ap_legendre(curve.ainvs, p)
        if a != b:
            raise ConsistencyError(f"a_{p}: table count {a} != Legendre count {b}")


# ---------------------------------------------------------- Tate's algorithm


def _v(n: int, p: int) -> int:
    return 10**6 if n == 0 else arith.valuation(n, p)


def _quad_roots(a, b, c, p) -> list[int]:
    """Roots in F_p of a Y^2 + b Y + c (a a unit)."""
    if p < 1000:
        return [y for y in range(p) if (a * y * y + b * y + c) % p == 0]
    d = (b * b - 4 * a * c) % p
    if d == 0:
        return [(-b * pow(2 * a, -1, p)) % p]
    if arith.legendre(d, p) == -1:
        return []
    s = arith.sqrt_mod_p(d, p)
    inv = pow(2 * a, -1, p)
    return sorted({(-b + s) * inv % p, (-b - s) * inv % p})


def _double_root(a, b, c, p) -> int:
    r = _quad_roots(a, b, c, p)
    if len(r) != 1:
        raise AssertionError("expected a double root")
    return r[0]


def _cubic_root_multiplicities(f, p) -> dict[int, int]:
    """{root: multiplicity} for the F_p-rational roots of a monic cubic."""
    f = arith.pnorm(list(f), p)
    if p < 1000:
        roots = [x for x in range(p) if arith.peval(f, x, p) == 0]
    else:
        roots = arith.roots_mod_p(f, p)
    out = {}
    for r in roots:
        m, g = 0, list(f)
        while len(g) > 1 and arith.peval(g, r, p) == 0:
            g = arith.pdivmod(g, [-r % p, 1], p)[0]
            m += 1
        out[r] = m
    return out


def _singular_point(a, p):
    if p <= 3:
        a1, a2, a3, a4, a6 = a
        for x in range(p):
            for y in range(p):
                F = y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6
                Fx = a1 * y - 3 * x * x - 2 * a2 * x - a4
                Fy = 2 * y + a1 * x + a3
                if F % p == 0 and Fx % p == 0 and Fy % p == 0:
                    return x, y
        raise AssertionError("no singular point found mod p")
    inv = _invariants(*a)
    a1, a3 = a[0], a[2]
    if inv.c4 % p == 0:
        r = -pow(12, -1, p) * inv.b2
    else:
        r = -pow(12 * inv.c4, -1, p) * (inv.c6 + inv.b2 * inv.c4)
    t = -pow(2, -1, p) * (a1 * r + a3)
    return r % p, t % p


def tate(a, p: int) -> LocalData:
    """Tate's algorithm at the prime p for the integral model a."""
    a = tuple(int(x) for x in a)
    if not arith.is_prime(p):
        raise PreconditionError(f"{p} is not prime")
    while True:
        inv = _invariants(*a)
        vd = _v(inv.disc, p)
        if vd == 0:
            return LocalData(p, "good", "I0", 0, 1, 1, 0, a)
        x0, y0 = _singular_point(a, p)
        a = transform(a, r=x0, t=y0)
        a1, a2, a3, a4, a6 = a
        assert a3 % p == 0 and a4 % p == 0 and a6 % p == 0, "singular point not moved to origin"
        inv = _invariants(*a)
        if inv.b2 % p:
            split = len(_quad_roots(1, a1, -a2, p)) > 0
            c = vd if split else (2 if vd % 2 == 0 else 1)
            return LocalData(p, "split" if split else "nonsplit", f"I{vd}", 1, vd, c, vd, a)
        if _v(a6, p) < 2:
            return LocalData(p, "additive", "II", vd, 1, 1, vd, a)
        if _v(inv.b8, p) < 3:
            return LocalData(p, "additive", "III", vd - 1, 2, 2, vd, a)
        if _v(inv.b6, p) < 3:
            c = 3 if _quad_roots(1, a3 // p, -(a6 // p**2), p) else 1
            return LocalData(p, "additive", "IV", vd - 2, 3, c, vd, a)
        # arrange p | a1, a2; p^2 | a3, a4; p^3 | a6
        if p <= 3:
            for s in range(p):
                found = False
                for t in range(p * p):
                    b = transform(a, s=s, t=t)
                    if b[0] % p == 0 and b[1] % p == 0 and b[2] % p**2 == 0 and b[3] % p**2 == 0 and b[4] % p**3 == 0:
                        found = True
                        break
                if found:
                    break
            else:
                raise AssertionError("no (s, t) normalizing the model")
            a = b
        else:
            h = pow(2, -1, p * p)
            a = transform(a, s=(-a1 * h) % p, t=(-a3 * h) % (p * p))
        a1, a2, a3, a4, a6 = a
        P = [a6 // p**3, a4 // p**2, a2 // p, 1]
        roots = _cubic_root_multiplicities(P, p)
        mults = sorted(roots.values(), reverse=True)
        if not mults or mults[0] == 1:
            # three distinct roots over the algebraic closure
            if arith._cubic_disc([c % p for c in P]) % p == 0:
                raise AssertionError("cubic inseparable but no repeated rational root")
            return LocalData(p, "additive", "I0*", vd - 4, 4, 1 + len(roots), vd, a)
        beta = max(roots, key=roots.get)
        if roots[beta] == 2:
            a = transform(a, r=p * beta)
            mx = my = p * p
            ix = iy = 3
            cp = 0
            while cp == 0:
                a1, a2, a3, a4, a6 = a
                xa2, xa3, xa4, xa6 = a2 // p, a3 // my, a4 // (p * mx), a6 // (mx * my)
                if (xa3 * xa3 + 4 * xa6) % p:
                    cp = 4 if _quad_roots(1, xa3, -xa6, p) else 2
                    break
                t = my * _double_root(1, xa3, -xa6, p)
                a = transform(a, t=t)
                my *= p
                iy += 1
                a1, a2, a3, a4, a6 = a
                xa2, xa4, xa6 = a2 // p, a4 // (p * mx), a6 // (p * mx * mx)
                if (xa4 * xa4 - 4 * xa2 * xa6) % p:
                    cp = 4 if _quad_roots(xa2, xa4, xa6, p) else 2
                    break
                r = mx * _double_root(xa2, xa4, xa6, p)
                a = transform(a, r=r)
                mx *= p
                ix += 1
            n = ix + iy - 5
            return LocalData(p, "additive", f"I{n}*", vd - 4 - n, 4, cp, vd, a)
        # triple root
        a = transform(a, r=p * beta)
        a1, a2, a3, a4, a6 = a
        y3, y6 = a3 // p**2, a6 // p**4
        if (y3 * y3 + 4 * y6) % p:
            c = 3 if _quad_roots(1, y3, -y6, p) else 1
            return LocalData(p, "additive", "IV*", vd - 6, 3, c, vd, a)
        a = transform(a, t=p * p * _double_root(1, y3, -y6, p))
        a1, a2, a3, a4, a6 = a
        if _v(a4, p) < 4:
            return LocalData(p, "additive", "III*", vd - 7, 2, 2, vd, a)
        if _v(a6, p) < 6:
            return LocalData(p, "additive", "II*", vd - 8, 1, 1, vd, a)
        a = transform(a, u=p)
