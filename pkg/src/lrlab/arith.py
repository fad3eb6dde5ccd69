"""Integer and finite-field arithmetic.

Primality, factorization, Legendre symbols, dense polynomials over F_p
(lists of ints, lowest degree first) and polynomials over F_2 packed into
Python ints (bit i is the coefficient of x^i).
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import FactorizationError, PreconditionError

# ---------------------------------------------------------------- integers

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_SMALL_PRIMES = None
FACTOR_CAP_BITS = 256


def is_prime(n: int) -> bool:
    """Miller-Rabin, deterministic below 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (sieve of Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def _small_primes():
    global _SMALL_PRIMES
    if _SMALL_PRIMES is None:
        _SMALL_PRIMES = [int(p) for p in primes_up_to(10_000)]
    return _SMALL_PRIMES


def _pollard_brent(n: int, rng: random.Random) -> int:
    if n % 2 == 0:
        return 2
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of |n| as {prime: exponent}.

    Trial division to 10^4, then Brent's variant of Pollard rho.  Raises
    FactorizationError when |n| exceeds ``FACTOR_CAP_BITS``.
    """
    n = abs(int(n))
    if n == 0:
        raise PreconditionError("cannot factor 0")
    if n.bit_length() > FACTOR_CAP_BITS:
        raise FactorizationError(f"{n.bit_length()}-bit integer exceeds factoring cap")
    out: dict[int, int] = {}
    for p in _small_primes():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n == 1:
        return out
    rng = random.Random(n)
    stack = [n]
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        r = math.isqrt(m)
        if r * r == m:
            stack += [r, r]
            continue
        d = _pollard_brent(m, rng)
        stack += [d, m // d]
    return dict(sorted(out.items()))


def valuation(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise PreconditionError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def squarefree_part(n: int, factorization: dict[int, int] | None = None) -> int:
    """Signed squarefree part: the unique squarefree d with n = d * m^2."""
    if n == 0:
        raise PreconditionError("squarefree part of 0")
    fac = factorization if factorization is not None else factorize(n)
    d = -1 if n < 0 else 1
    for p, e in fac.items():
        if e % 2:
            d *= p
    return d


def radical(n: int) -> int:
    return math.prod(factorize(n))


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for an odd prime p, via quadratic reciprocity."""
    if p < 3 or p % 2 == 0:
        raise PreconditionError(f"legendre needs an odd prime, got {p}")
    a %= p
    t = 1
    n = p
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def legendre_euler(a: int, p: int) -> int:
    """Legendre symbol by Euler's criterion (independent path for tests)."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def sqrt_mod_p(a: int, p: int) -> int:
    """A square root of a modulo an odd prime p (Tonelli-Shanks)."""
    a %= p
    if a == 0:
        return 0
    if legendre(a, p) != 1:
        raise PreconditionError(f"{a} is not a square mod {p}")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while legendre(z, p) != -1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


# ------------------------------------------------------ polynomials over F_p


def ptrim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def pnorm(f: Sequence[int], p: int) -> list[int]:
    return ptrim([c % p for c in f])


def padd(f, g, p):
    n = max(len(f), len(g))
    return ptrim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % p for i in range(n)])


def psub(f, g, p):
    return padd(f, [-c for c in g], p)


def pmul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return pnorm(out, p)


def pdivmod(f, g, p):
    f = pnorm(f, p)
    g = pnorm(g, p)
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv = pow(g[-1], -1, p)
    q = [0] * max(len(f) - len(g) + 1, 0)
    r = list(f)
    while len(r) >= len(g):
        c = r[-1] * inv % p
        k = len(r) - len(g)
        q[k] = c
        for i, b in enumerate(g):
            r[k + i] = (r[k + i] - c * b) % p
        ptrim(r)
    return ptrim(q), r


def pmod(f, g, p):
    return pdivmod(f, g, p)[1]


def pmonic(f, p):
    if not f:
        return f
    inv = pow(f[-1], -1, p)
    return [c * inv % p for c in f]


def pgcd(f, g, p):
    f, g = pnorm(f, p), pnorm(g, p)
    while g:
        f, g = g, pmod(f, g, p)
    return pmonic(f, p)


def ppowmod(f, e, m, p):
    result = [1]
    base = pmod(f, m, p)
    while e:
        if e & 1:
            result = pmod(pmul(result, base, p), m, p)
        base = pmod(pmul(base, base, p), m, p)
        e >>= 1
    return result


def peval(f, x, p):
    acc = 0
    for c in reversed(f):
        acc = (acc * x + c) % p
    return acc


def pderiv(f, p):
    return pnorm([i * c for i, c in enumerate(f)][1:], p)


def peval_all(f: Sequence[int], p: int) -> np.ndarray:
    """Values of f at every x in F_p, vectorized."""
    x = np.arange(p, dtype=np.int64)
    acc = np.zeros(p, dtype=np.int64)
    for c in reversed(list(f)):
        acc = (acc * x + (c % p)) % p
    return acc


def roots_mod_p(f: Sequence[int], p: int, seed: int = 0) -> list[int]:
    """Distinct roots of f in F_p, sorted (Cantor-Zassenhaus splitting)."""
    f = pmonic(pnorm(f, p), p)
    if len(f) <= 1:
        return []
    if p < 64:
        return [x for x in range(p) if peval(f, x, p) == 0]
    g = pgcd(f, psub(ppowmod([0, 1], p, f, p), [0, 1], p), p)
    rng = random.Random(seed)
    out: list[int] = []
    stack = [g]
    while stack:
        h = stack.pop()
        d = len(h) - 1
        if d == 0:
            continue
        if d == 1:
            out.append(-h[0] % p)
            continue
        while True:
            a = rng.randrange(p)
            w = psub(ppowmod([a, 1], (p - 1) // 2, h, p), [1], p)
            s = pgcd(h, w, p)
            if 0 < len(s) - 1 < d:
                stack += [s, pdivmod(h, s, p)[0]]
                break
    return sorted(out)


@dataclass(frozen=True)
class RootProfile:
    """Factorization shape of a separable monic cubic over F_p.

    kind is "three", "one" or "none".  For "one", ``root`` is the unique
    root and ``cofactor`` = (s, t) with f = (x - root)(x^2 + s x + t).
    """

    kind: str
    roots: tuple[int, ...] = ()
    cofactor: tuple[int, int] | None = None

    @property
    def nroots(self) -> int:
        return len(self.roots)

    @property
    def root(self) -> int:
        if self.kind != "one":
            raise PreconditionError("root is only defined for a single root")
        return self.roots[0]


EVAL_LIMIT = 1 << 16


def _cubic_disc(f):
    d, c, b, _ = f
    return b * b * c * c - 4 * c**3 - 4 * b**3 * d - 27 * d * d + 18 * b * c * d


def _x_power_mod_cubic(f, p):
    """x^p mod the monic cubic f over F_p, as a coefficient list."""
    c0, c1, c2 = f[0] % p, f[1] % p, f[2] % p

    def mulmod(a, b):
        a0, a1, a2 = a
        b0, b1, b2 = b
        # product coefficients e0..e4
        e0 = a0 * b0
        e1 = a0 * b1 + a1 * b0
        e2 = a0 * b2 + a1 * b1 + a2 * b0
        e3 = a1 * b2 + a2 * b1
        e4 = a2 * b2
        # x^4 = x * x^3, x^3 = -(c2 x^2 + c1 x + c0)
        e3 -= e4 * c2
        e2 -= e4 * c1
        e1 -= e4 * c0
        e2 -= e3 * c2
        e1 -= e3 * c1
        e0 -= e3 * c0
        return (e0 % p, e1 % p, e2 % p)

    r = (1, 0, 0)
    b = (0, 1, 0)
    e = p
    while e:
        if e & 1:
            r = mulmod(r, b)
        b = mulmod(b, b)
        e >>= 1
    return ptrim(list(r))


def root_profile(f: Sequence[int], p: int, method: str = "auto") -> RootProfile:
    """Root count and split data of a monic cubic f = [c0, c1, c2, 1] mod p.

    ``method`` is "eval" (evaluate at every residue), "gcd" (degree of
    gcd(x^p - x, f)) or "auto" (eval below 2^16).  The cubic must be
    separable mod p.
    """
    f = [int(c) for c in f]
    if len(f) != 4 or f[3] != 1:
        raise PreconditionError("root_profile expects a monic cubic [c0, c1, c2, 1]")
    if _cubic_disc(f) % p == 0:
        raise PreconditionError(f"cubic is inseparable mod {p}")
    if method == "auto":
        method = "eval" if p < EVAL_LIMIT else "gcd"
    if method == "eval":
        vals = peval_all(f, p)
        roots = tuple(int(x) for x in np.flatnonzero(vals == 0))
    elif method == "gcd":
        xp = _x_power_mod_cubic(f, p)
        g = pgcd(f, psub(xp, [0, 1], p), p)
        n = len(g) - 1
        if n == 1:
            roots = (-g[0] % p,)
        elif n == 3:
            roots = tuple(roots_mod_p(f, p))
        else:
            roots = ()
    else:
        raise PreconditionError(f"unknown method {method!r}")
    if len(roots) == 3:
        return RootProfile("three", roots)
    if len(roots) == 1:
        a = roots[0]
        # synthetic division by (x - a)
        c2 = f[2]
        s = (c2 + a) % p
        t = (f[1] + a * s) % p
        return RootProfile("one", roots, (s, t))
    if len(roots) == 0:
        return RootProfile("none")
    raise AssertionError("a separable cubic cannot have exactly two roots")


# ------------------------------------------------ polynomials over F_2 (ints)


def f2_deg(f: int) -> int:
    return f.bit_length() - 1


def f2_mul(a: int, b: int) -> int:
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def f2_divmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise ZeroDivisionError("F2 polynomial division by zero")
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        s = a.bit_length() - db
        q ^= 1 << s
        a ^= b << s
    return q, a


def f2_mod(a: int, b: int) -> int:
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def f2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, f2_mod(a, b)
    return a


def f2_mulmod(a: int, b: int, m: int) -> int:
    return f2_mod(f2_mul(a, b), m)


def f2_powmod(a: int, e: int, m: int) -> int:
    r, a = 1, f2_mod(a, m)
    while e:
        if e & 1:
            r = f2_mulmod(r, a, m)
        a = f2_mulmod(a, a, m)
        e >>= 1
    return r


def f2_deriv(f: int) -> int:
    # odd-degree coefficients shift down one place
    out, i = 0, 1
    while (f >> i):
        if (f >> i) & 1 and i % 2 == 1:
            out |= 1 << (i - 1)
        i += 1
    return out


def f2_sqrt(f: int) -> int:
    """Square root of a polynomial whose odd coefficients vanish."""
    out, i = 0, 0
    while f >> (2 * i):
        if (f >> (2 * i)) & 1:
            out |= 1 << i
        i += 1
    return out


def f2_from_coeffs(coeffs: Sequence[int]) -> int:
    out = 0
    for i, c in enumerate(coeffs):
        if c % 2:
            out |= 1 << i
    return out


def _f2_squarefree(f: int) -> list[tuple[int, int]]:
    # Yun-style decomposition in characteristic 2
    if f2_deg(f) <= 0:
        return []
    d = f2_deriv(f)
    if d == 0:
        return [(g, 2 * e) for g, e in _f2_squarefree(f2_sqrt(f))]
    c = f2_gcd(f, d)
    w = f2_divmod(f, c)[0]
    out, i = [], 1
    while w != 1:
        y = f2_gcd(w, c)
        z = f2_divmod(w, y)[0]
        if z != 1:
            out.append((z, i))
        i += 1
        w = y
        c = f2_divmod(c, y)[0]
    if c != 1:
        out += [(g, 2 * e) for g, e in _f2_squarefree(f2_sqrt(c))]
    return out


def _f2_ddf(f: int) -> list[tuple[int, int]]:
    out = []
    h, d = 2, 0
    while f2_deg(f) >= 2 * (d + 1):
        d += 1
        h = f2_mulmod(h, h, f)
        g = f2_gcd(f, h ^ 2)
        if g != 1:
            out.append((g, d))
            f = f2_divmod(f, g)[0]
            h = f2_mod(h, f) if f != 1 else 0
    if f2_deg(f) > 0:
        out.append((f, f2_deg(f)))
    return out


def _f2_edf(f: int, d: int, rng: random.Random) -> list[int]:
    n = f2_deg(f)
    if n == d:
        return [f]
    while True:
        a = rng.getrandbits(n) | 2
        t, x = 0, f2_mod(a, f)
        for _ in range(d):
            t ^= x
            x = f2_mulmod(x, x, f)
        g = f2_gcd(f, t)
        if 0 < f2_deg(g) < n:
            return _f2_edf(g, d, rng) + _f2_edf(f2_divmod(f, g)[0], d, rng)


def f2_factor(f: int, seed: int = 1) -> list[tuple[int, int]]:
    """Irreducible factorization over F_2 as sorted (factor, multiplicity).

    Squarefree decomposition, then distinct-degree, then equal-degree
    splitting with the trace map.
    """
    if f == 0:
        raise PreconditionError("cannot factor the zero polynomial")
    rng = random.Random(seed)
    out = []
    for g, e in _f2_squarefree(f):
        for h, d in _f2_ddf(g):
            out += [(u, e) for u in _f2_edf(h, d, rng)]
    return sorted(out)


def f2_is_irreducible(f: int) -> bool:
    fac = f2_factor(f)
    return len(fac) == 1 and fac[0][1] == 1
