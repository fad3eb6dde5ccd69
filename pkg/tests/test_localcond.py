import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lrlab import arith, localcond, mod2rep
from lrlab.curves import WeierstrassCurve
from lrlab.errors import NotClassifiedError, PreconditionError


def test_h1_dims(e11):
    assert localcond.local_h1_dim(e11, 7) == 2  # order 2
    assert localcond.local_h1_dim(e11, 3) == 0  # order 3
    with pytest.raises(PreconditionError):
        localcond.local_h1_dim(e11, 11)
    with pytest.raises(PreconditionError):
        localcond.local_h1_dim(e11, 2)


def test_h1_dim_matches_euler_characteristic(curves):
    for E in curves.values():
        for q in arith.primes_up_to(500).tolist():
            if q == 2 or (E.conductor * E.disc) % q == 0:
                continue
            assert localcond.local_h1_dim(E, q) == localcond._h1_dim_any(E, q)


def test_classification_branches(curves, e11):
    c = localcond.classify_local_condition(e11, "inf")
    assert (c.kind, c.h1_dim, c.condition_dim) == (localcond.ARCHIMEDEAN, 0, 0)
    c = localcond.classify_local_condition(e11, 7, "level_raised", 1)
    assert (c.kind, c.h1_dim, c.condition_dim) == (localcond.TORIC, 2, 1)
    with pytest.raises(NotClassifiedError):
        localcond.classify_local_condition(e11, 7, "level_raised", -1)
    with pytest.raises(NotClassifiedError):
        localcond.classify_local_condition(e11, 3, "level_raised", 1)
    c = localcond.classify_local_condition(e11, 2)
    assert c.kind == localcond.FLAT2 and c.condition_dim * 2 == c.h1_dim
    c = localcond.classify_local_condition(e11, 11)
    assert c.kind == localcond.UNRAMIFIED
    with pytest.raises(NotClassifiedError):
        localcond.classify_local_condition(curves["2351a1"], 2)  # E[2] trivial at 2
    with pytest.raises(NotClassifiedError):
        localcond.classify_local_condition(WeierstrassCurve.from_ainvs((0, 0, 0, -3, 1)), "inf")  # disc > 0
    with pytest.raises(NotClassifiedError):
        localcond.classify_local_condition(WeierstrassCurve.from_ainvs((0, 1, 0, 4, 4)), 2)  # 20a1, additive
    with pytest.raises(PreconditionError):
        localcond.classify_local_condition(e11, 7, "bogus")


def test_condition_is_half_dimension(curves):
    for E in curves.values():
        for v in ["inf", 2] + arith.primes_up_to(200).tolist()[1:]:
            try:
                c = localcond.classify_local_condition(E, v)
            except NotClassifiedError:
                continue
            assert 2 * c.condition_dim == c.h1_dim


def test_qform_11a1_at_7(e11):
    inv = localcond.involution_map(e11, 7)
    assert inv.matrix == ((4, 1), (1, 3))
    assert inv.square() == ((3, 0), (0, 3))
    assert localcond.swaps_conjugate_roots(inv)
    cert = localcond.qform_isotropy(e11, 7)
    assert (cert.status, cert.derivative, cert.residue_symbol) == ("NotNorm", 3, -1)


def test_qform_11a1_at_13_oracle(e11):
    g = mod2rep.two_division_cubic(e11)
    roots = [x for x in range(13) if sum(c * x**i for i, c in enumerate(g)) % 13 == 0]
    assert len(roots) == 1
    a = roots[0]
    deriv = (3 * a * a + 2 * g[2] * a + g[1]) % 13
    cert = localcond.qform_isotropy(e11, 13)
    assert cert.alpha1 == a and cert.derivative == deriv
    assert cert.status == ("CertifiedIsotropic" if arith.legendre(deriv, 13) == 1 else "NotNorm")


def test_both_certificate_outcomes_occur(e11):
    statuses = {}
    for w in arith.primes_up_to(400).tolist():
        if w > 2 and e11.disc % w and mod2rep.frob_order(e11, w) == 2:
            c = localcond.qform_isotropy(e11, w)
            assert (c.status == "CertifiedIsotropic") == (arith.legendre(c.derivative, w) == 1)
            statuses.setdefault(c.status, w)
    assert set(statuses) == {"CertifiedIsotropic", "NotNorm"}


def test_involution_all_order2_primes(curves):
    seen = 0
    for E in curves.values():
        for w in arith.primes_up_to(1000).tolist():
            if w == 2 or (E.conductor * E.disc) % w == 0 or mod2rep.frob_order(E, w) != 2:
                continue
            inv = localcond.involution_map(E, w)
            sq = inv.square()
            assert inv.trace == 0 and sq[0][1] == sq[1][0] == 0 and sq[0][0] == sq[1][1] != 0
            assert localcond.swaps_conjugate_roots(inv)
            localcond.qform_isotropy(E, w)  # asserts the two derivative paths agree
            seen += 1
    assert seen > 300


@given(st.integers(1, 50), st.sampled_from([7, 13, 17, 19, 29, 41]))
@settings(max_examples=60, deadline=None)
def test_square_class_independent_of_scaling(u, w):
    # scaling the roots by u multiplies g'(alpha1) by u^2
    from lrlab.curves import WeierstrassCurve as W
    E = W.from_ainvs((0, -1, 1, -10, -20))
    assume(u % w and E.disc % w and mod2rep.frob_order(E, w) == 2)
    g = mod2rep.two_division_cubic(E)
    scaled = (g[0] * u**3, g[1] * u**2, g[2] * u, 1)
    a = localcond.involution_map(E, w)
    b = localcond.involution_map(scaled, w)
    da = (a.alpha1**2 + a.cofactor[0] * a.alpha1 + a.cofactor[1]) % w
    db = (b.alpha1**2 + b.cofactor[0] * b.alpha1 + b.cofactor[1]) % w
    assert arith.legendre(da, w) == arith.legendre(db, w)


def test_involution_rejects_three_roots():
    with pytest.raises(PreconditionError):
        localcond.involution_map((0, -1, 0, 1), 5)
