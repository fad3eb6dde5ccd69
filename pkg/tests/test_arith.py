import random

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from lrlab import arith
from lrlab.errors import PreconditionError

small_primes = st.sampled_from([int(p) for p in arith.primes_up_to(97) if p > 2])


def test_is_prime_matches_sympy():
    for n in range(-5, 5000):
        assert arith.is_prime(n) == sympy.isprime(n)
    for n in (2**61 - 1, 2**61 + 1, 10**18 + 9, 3215031751):
        assert arith.is_prime(n) == sympy.isprime(n)


def test_primes_up_to():
    assert arith.primes_up_to(1).tolist() == []
    assert arith.primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert len(arith.primes_up_to(10**5)) == 9592


@given(st.integers(min_value=1, max_value=10**30))
@settings(max_examples=200, deadline=None)
def test_factorize_matches_sympy(n):
    assert arith.factorize(n) == dict(sympy.factorint(n))


def test_factorize_signs_and_errors():
    assert arith.factorize(-161051) == {11: 5}
    with pytest.raises(PreconditionError):
        arith.factorize(0)


@pytest.mark.parametrize("n", list(range(-1000, 1001, 7)) + [10**6, -(10**6), 999_983 * 4])
def test_squarefree_part_times_square(n):
    if n == 0:
        return
    d = arith.squarefree_part(n)
    m2 = n // d
    assert n % d == 0 and m2 > 0
    r = sympy.integer_nthroot(m2, 2)
    assert r[1]
    assert sympy.factorint(abs(d)) == {p: 1 for p in sympy.factorint(abs(d))}


def test_squarefree_part_dense():
    for n in range(1, 20001):
        d = arith.squarefree_part(n)
        assert (n // d) == sympy.integer_nthroot(n // d, 2)[0] ** 2


def test_legendre_multiplicative_random_triples():
    rng = random.Random(7)
    primes = [int(p) for p in arith.primes_up_to(5000) if p > 2]
    for _ in range(10_000):
        p = rng.choice(primes)
        a, b = rng.randrange(1, p), rng.randrange(1, p)
        assert arith.legendre(a, p) * arith.legendre(b, p) == arith.legendre(a * b, p)


@given(st.integers(-10**6, 10**6), small_primes)
def test_legendre_two_paths(a, p):
    assert arith.legendre(a, p) == arith.legendre_euler(a, p) == sympy.jacobi_symbol(a % p, p)


def test_legendre_rejects_even():
    with pytest.raises(PreconditionError):
        arith.legendre(3, 2)


@given(st.integers(1, 10**6), small_primes)
def test_sqrt_mod_p(a, p):
    if arith.legendre(a, p) == 1:
        r = arith.sqrt_mod_p(a, p)
        assert r * r % p == a % p


def test_root_profile_examples():
    assert arith.root_profile([0, -1, 0, 1], 5).kind == "three"
    prof = arith.root_profile([3, 1, 3, 1], 7)
    assert prof.kind == "one" and prof.root == 4 and prof.cofactor == (0, 1)
    brute = [x for x in range(5) if (x**3 + x + 1) % 5 == 0]
    assert arith.root_profile([1, 1, 0, 1], 5).nroots == len(brute)
    with pytest.raises(PreconditionError):
        arith.root_profile([0, 0, 0, 1], 7)


def test_root_profile_brute_force_all_small_primes():
    rng = random.Random(3)
    primes = [int(p) for p in arith.primes_up_to(97) if p > 2]
    checked = 0
    while checked < 1000:
        p = rng.choice(primes)
        f = [rng.randrange(p) for _ in range(3)] + [1]
        if arith._cubic_disc(f) % p == 0:
            continue
        roots = tuple(x for x in range(p) if sum(c * x**i for i, c in enumerate(f)) % p == 0)
        for method in ("eval", "gcd"):
            prof = arith.root_profile(f, p, method)
            assert prof.roots == roots
            if prof.kind == "one":
                s, t = prof.cofactor
                a = prof.root
                for x in range(p):
                    assert (x - a) * (x * x + s * x + t) % p == sum(c * x**i for i, c in enumerate(f)) % p
        checked += 1


def test_root_profile_large_prime_gcd_path():
    p = 1_000_003
    f = [5, 0, 7, 1]
    a = arith.root_profile(f, p, "gcd")
    b = arith.root_profile(f, p, "eval")
    assert a == b


@given(st.lists(st.integers(0, 1), min_size=1, max_size=24))
@settings(max_examples=300, deadline=None)
def test_f2_factor_matches_sympy(bits):
    bits = bits + [1]
    f = arith.f2_from_coeffs(bits)
    ours = arith.f2_factor(f)
    x = sympy.symbols("x")
    poly = sympy.Poly(sum(c * x**i for i, c in enumerate(bits)), x, modulus=2)
    _, facs = poly.factor_list()
    theirs = sorted((arith.f2_from_coeffs([int(c) % 2 for c in reversed(h.all_coeffs())]), e) for h, e in facs)
    assert sorted(ours) == theirs
    prod = 1
    for h, e in ours:
        assert arith.f2_is_irreducible(h)
        for _ in range(e):
            prod = arith.f2_mul(prod, h)
    assert prod == f


@given(st.integers(1, 1 << 20), st.integers(1, 1 << 12))
def test_f2_divmod(a, b):
    q, r = arith.f2_divmod(a, b)
    assert arith.f2_mul(q, b) ^ r == a
    assert r == 0 or arith.f2_deg(r) < arith.f2_deg(b)


@given(st.lists(st.integers(-50, 50), min_size=1, max_size=6), st.lists(st.integers(-50, 50), min_size=1, max_size=6),
       small_primes)
def test_fp_poly_division(f, g, p):
    g = arith.pnorm(g, p)
    if not g:
        return
    q, r = arith.pdivmod(f, g, p)
    assert arith.padd(arith.pmul(q, g, p), r, p) == arith.pnorm(f, p)
