"""The mod-2 Galois representation attached to E[2].

Everything is read off the scaled 2-division cubic
g(x) = x^3 + b2 x^2 + 8 b4 x + 16 b6, whose roots are 4 * (x-coordinates
of the nonzero 2-torsion points).  disc(g) = 2^8 * disc(E).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import arith, padic
from .curves import WeierstrassCurve
from .errors import ConsistencyError, PrecisionError, PreconditionError

DISC_SCALE = 2**8

#: statuses of a hypothesis item
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def two_division_cubic(E: WeierstrassCurve) -> tuple[int, int, int, int]:
    """Coefficients (low -> high) of the monic scaled 2-division cubic."""
    inv = E.invariants
    return (16 * inv.b6, 8 * inv.b4, inv.b2, 1)


def cubic_discriminant(f) -> int:
    return arith._cubic_disc(list(f))


def frob_order(E: WeierstrassCurve, q: int, method: str = "auto") -> int:
    """Order of Frobenius at q in the image of the mod-2 representation.

    3 roots of g mod q -> 1, one root -> 2, irreducible -> 3.
    """
    if q % 2 == 0 or E.disc % q == 0:
        raise PreconditionError(f"frob_order needs an odd prime not dividing the discriminant, got {q}")
    prof = arith.root_profile(two_division_cubic(E), q, method=method)
    return {"three": 1, "one": 2, "none": 3}[prof.kind]


def frob_order_checked(E: WeierstrassCurve, q: int) -> int:
    """frob_order plus the two parity cross-checks (discriminant and a_q)."""
    order = frob_order(E, q)
    sq = arith.legendre(E.disc, q) == 1
    if sq != (order in (1, 3)):
        raise ConsistencyError(f"Frobenius order {order} at {q} contradicts the discriminant's residue symbol")
    if (order == 3) != (E.ap(q) % 2 == 1):
        raise ConsistencyError(f"Frobenius order {order} at {q} contradicts the parity of a_{q}")
    return order


def _integer_roots(f) -> list[int]:
    if f[0] == 0:
        roots = {0}
        b, c = f[2], f[1]
        disc = b * b - 4 * c
        if disc >= 0:
            s = math.isqrt(disc)
            if s * s == disc and (s - b) % 2 == 0:
                roots |= {(-b + s) // 2, (-b - s) // 2}
        return sorted(roots)
    divs = [1]
    for p, e in arith.factorize(f[0]).items():
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(r for d in divs for r in (d, -d) if _exact_zero(f, r))


def _exact_zero(f, r) -> bool:
    acc = 0
    for c in reversed(f):
        acc = acc * r + c
    return acc == 0


def image_type(E: WeierstrassCurve) -> str:
    """"S3", "C3", "C2" or "Trivial" (subgroups of GL2(F2) up to conjugacy)."""
    g = two_division_cubic(E)
    nroots = len(_integer_roots(g))
    if nroots == 3:
        return "Trivial"
    if nroots == 1:
        return "C2"
    d = E.disc
    r = math.isqrt(d) if d > 0 else -1
    return "C3" if r >= 0 and r * r == d else "S3"


def delta_squareclass(E: WeierstrassCurve) -> int:
    """Squarefree part of the discriminant, i.e. the field Q(sqrt(disc))."""
    return arith.squarefree_part(E.disc, E.disc_factorization)


@dataclass(frozen=True)
class TwoAdicProfile:
    reduction: str  # good | multiplicative
    ordinary: bool | None  # None when multiplicative
    trivial_at_2: bool
    ramified_at_2: bool
    qp_roots: int  # roots of g in Q_2
    method: str


def _quad_ramified_2adic(d: int) -> bool:
    # Q_2(sqrt d) ramified iff the 2-adic square class of d is not 1 or 5 mod 8
    v = arith.valuation(d, 2)
    u = d // 2**v
    return v % 2 == 1 or u % 4 != 1


def _is_2adic_square(d: int) -> bool:
    v = arith.valuation(d, 2)
    u = d // 2**v
    return v % 2 == 0 and u % 8 == 1


def two_adic_profile(E: WeierstrassCurve, precision: int = 64) -> TwoAdicProfile:
    """Restriction of the mod-2 representation to a decomposition group at 2.

    Primary path: count roots of g in Z_2 and in the unramified cubic
    extension at working precision 2^precision.  Multiplicative reduction
    with odd 2-adic discriminant valuation short-circuits to "ramified".
    """
    loc = E.local_data(2)
    if loc.kind == "additive":
        raise PreconditionError("additive reduction at 2 (4 divides the conductor)")
    g = two_division_cubic(E)
    mult = loc.is_multiplicative
    ordinary = None if mult else E.ap(2) % 2 == 1
    if mult and loc.disc_valuation % 2 == 1:
        return TwoAdicProfile("multiplicative", None, False, True, 1, "short-circuit")
    try:
        n1 = padic.count_roots(g, 2, 1, precision)
    except PrecisionError:
        raise PrecisionError(f"2-adic root count needs more than 2^{precision}; raise the precision") from None
    quad_ram = _quad_ramified_2adic(E.disc)
    if n1 == 3:
        trivial, ram = True, False
    elif n1 == 1:
        trivial, ram = False, quad_ram
    else:
        n3 = padic.count_roots(g, 2, 3, precision)
        trivial, ram = False, (n3 == 0) or quad_ram
    return TwoAdicProfile("multiplicative" if mult else "good", ordinary, trivial, ram, n1, "2-adic-roots")


def trivial_at_2_by_criterion(E: WeierstrassCurve) -> bool:
    """Good reduction at 2: trivial iff ordinary and disc is a 2-adic square."""
    if E.disc % 2 == 0:
        raise PreconditionError("criterion applies only to good reduction at 2")
    return E.ap(2) % 2 == 1 and delta_squareclass(E) % 8 == 1


@dataclass
class HypothesisItem:
    name: str
    status: str
    detail: str


@dataclass
class AssumptionReport:
    curve: str
    conductor: int
    items: list[HypothesisItem] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(i.status == PASS for i in self.items)

    @property
    def status(self) -> str:
        st = {i.status for i in self.items}
        if FAIL in st:
            return FAIL
        return INCONCLUSIVE if INCONCLUSIVE in st else PASS

    def to_dict(self):
        return {
            "curve": self.curve,
            "conductor": self.conductor,
            "status": self.status,
            "items": [{"name": i.name, "status": i.status, "detail": i.detail} for i in self.items],
        }


@dataclass(frozen=True)
class Mod2Profile:
    image: str
    delta_squareclass: int
    component_groups: dict
    two_adic: TwoAdicProfile | None
    conductor: int


def mod2_profile(E: WeierstrassCurve, precision: int = 64) -> Mod2Profile:
    N = E.conductor
    comps = {p: E.local_data(p).component_group_order for p in E.conductor_factorization()}
    tap = None
    if N % 4:
        tap = two_adic_profile(E, precision)
    return Mod2Profile(image_type(E), delta_squareclass(E), comps, tap, N)


def assumption_check(E: WeierstrassCurve, precision: int = 64) -> AssumptionReport:
    """Evaluate the five standing hypotheses for level raising mod 2."""
    N = E.conductor
    rep = AssumptionReport(E.name(), N)
    items = rep.items
    # conductor not divisible by 4
    items.append(HypothesisItem("conductor_not_divisible_by_4", PASS if N % 4 else FAIL, f"N = {N}"))
    img = image_type(E)
    d = delta_squareclass(E)
    ok = img == "S3" and d != -1
    items.append(HypothesisItem("image_S3_and_field_not_Q(i)", PASS if ok else FAIL, f"image {img}, Q(sqrt({d}))"))
    comps = {p: E.local_data(p).component_group_order for p in E.conductor_factorization()}
    odd = all(c % 2 for c in comps.values())
    detail = "component groups " + ", ".join(f"{p}:{c}" for p, c in comps.items())
    status = PASS if odd else FAIL
    tap = None
    if N % 4:
        try:
            tap = two_adic_profile(E, precision)
        except PrecisionError as exc:
            tap = exc
    if N % 2 == 0 and status == PASS:
        if isinstance(tap, Exception):
            status, detail = INCONCLUSIVE, detail + "; 2-adic precision exhausted"
        elif not tap.ramified_at_2:
            status, detail = FAIL, detail + "; unramified at 2"
        else:
            detail += "; ramified at 2"
    items.append(HypothesisItem("odd_component_groups", status, detail))
    if N % 2 == 1:
        if isinstance(tap, Exception):
            items.append(HypothesisItem("nontrivial_at_2", INCONCLUSIVE, "2-adic precision exhausted"))
        else:
            crit = trivial_at_2_by_criterion(E)
            if crit != tap.trivial_at_2:
                raise ConsistencyError("2-adic root count and the ordinary/square criterion disagree")
            items.append(HypothesisItem("nontrivial_at_2", FAIL if tap.trivial_at_2 else PASS,
                                        f"a_2 = {E.ap(2)}, Q(sqrt({d}))"))
    else:
        items.append(HypothesisItem("nontrivial_at_2", PASS, "not applicable: 2 divides N"))
    items.append(HypothesisItem("negative_discriminant", PASS if E.disc < 0 else FAIL, f"disc = {E.disc}"))
    return rep
