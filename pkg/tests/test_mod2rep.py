import math

import pytest
import sympy
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lrlab import arith, mod2rep
from lrlab.curves import WeierstrassCurve
from lrlab.errors import PreconditionError

curve_coeffs = st.lists(st.integers(-30, 30), min_size=5, max_size=5)


def _curve(a):
    try:
        return WeierstrassCurve.from_ainvs(a)
    except PreconditionError:
        assume(False)


@given(curve_coeffs)
@settings(max_examples=100, deadline=None)
def test_cubic_discriminant_scale(a):
    E = _curve(a)
    g = mod2rep.two_division_cubic(E)
    x = sympy.symbols("x")
    d = sympy.discriminant(sum(c * x**i for i, c in enumerate(g)), x)
    assert mod2rep.cubic_discriminant(g) == d == mod2rep.DISC_SCALE * E.disc


@pytest.mark.parametrize("label", ["11a1", "35a1", "37a1", "2351a1", "25861i1"])
def test_two_characterizations_agree(curves, label):
    E = curves[label]
    aps = E.aplist(10**4)
    for q in arith.primes_up_to(10**4).tolist():
        if q == 2 or (E.conductor * E.disc) % q == 0:
            continue
        order = mod2rep.frob_order(E, q)
        assert order == mod2rep.frob_order(E, q, method="gcd")
        assert (aps[q] % 2 == 0) == (order in (1, 2))
        assert (arith.legendre(E.disc, q) == 1) == (order in (1, 3))


def test_frob_order_checked(e11):
    assert [mod2rep.frob_order_checked(e11, q) for q in (3, 5, 7, 13)] == [3, 3, 2, 2]
    with pytest.raises(PreconditionError):
        mod2rep.frob_order(e11, 11)


def test_chebotarev_frequencies(e11):
    counts = {1: 0, 2: 0, 3: 0}
    for q in arith.primes_up_to(10**5).tolist():
        if q > 2 and e11.disc % q:
            counts[mod2rep.frob_order(e11, q, method="gcd")] += 1
    n = sum(counts.values())
    for k, dens in ((1, 1 / 6), (2, 1 / 2), (3, 1 / 3)):
        assert abs(counts[k] / n - dens) <= 0.02


def test_image_types(curves):
    assert mod2rep.image_type(curves["11a1"]) == "S3"
    assert mod2rep.image_type(WeierstrassCurve.from_ainvs((1, 0, 1, 4, -6))) == "C2"  # 14a1, 6-torsion
    assert mod2rep.image_type(WeierstrassCurve.from_ainvs((1, 1, 1, -10, -10))) == "Trivial"  # 15a1
    assert mod2rep.image_type(WeierstrassCurve.from_ainvs((0, 0, 0, -3, 1))) == "C3"  # disc of x^3-3x+1 is 81


@given(curve_coeffs)
@settings(max_examples=100, deadline=None)
def test_image_type_matches_sympy_factorization(a):
    E = _curve(a)
    x = sympy.symbols("x")
    g = mod2rep.two_division_cubic(E)
    degs = sorted(sympy.degree(h, x) for h, e in sympy.factor_list(sum(c * x**i for i, c in enumerate(g)))[1]
                  for _ in range(e))
    img = mod2rep.image_type(E)
    if degs == [1, 1, 1]:
        assert img == "Trivial"
    elif degs == [1, 2]:
        assert img == "C2"
    else:
        r = math.isqrt(E.disc) if E.disc > 0 else -1
        assert img == ("C3" if r * r == E.disc else "S3")


def test_assumptions(curves):
    for label in ("11a1", "35a1"):
        rep = mod2rep.assumption_check(curves[label])
        assert rep.holds and len(rep.items) == 5
    rep = mod2rep.assumption_check(curves["2351a1"])
    failing = [i.name for i in rep.items if i.status != mod2rep.PASS]
    assert failing == ["nontrivial_at_2"]
    assert rep.items[3].name == "nontrivial_at_2"


def test_two_adic_profiles(curves):
    p = mod2rep.two_adic_profile(curves["11a1"])
    assert p.ordinary is False and p.ramified_at_2 and not p.trivial_at_2
    p = mod2rep.two_adic_profile(curves["2351a1"])
    assert p.ordinary and p.trivial_at_2


@given(curve_coeffs)
@settings(max_examples=150, deadline=None)
def test_trivial_at_2_two_paths(a):
    E = _curve(a)
    assume(E.disc % 2)
    assert mod2rep.two_adic_profile(E).trivial_at_2 == mod2rep.trivial_at_2_by_criterion(E)
