"""Local cohomology dimensions, local-condition classification and the
isotropy certificate for toric lines at level-raising primes."""
from __future__ import annotations

from dataclasses import dataclass

from . import arith, mod2rep, padic
from .curves import WeierstrassCurve
from .errors import NotClassifiedError, PreconditionError

INF = "inf"


def _fixed_dim(E: WeierstrassCurve, v: int, precision: int = 64) -> int:
    """dim of E[2]^{G_v}, from the number of roots of g in Q_v."""
    g = mod2rep.two_division_cubic(E)
    n = padic.count_roots(g, v, 1, precision)
    return {0: 0, 1: 1, 3: 2}[n]


def _h1_dim_any(E: WeierstrassCurve, v: int) -> int:
    # local Euler characteristic: 2 * dim H^0 at odd v, 2 + 2 * dim H^0 at 2
    h0 = _fixed_dim(E, v)
    return 2 * h0 + (2 if v == 2 else 0)


def local_h1_dim(E: WeierstrassCurve, v: int) -> int:
    """dim H^1(Q_v, E[2]) for an odd prime v not dividing N * disc.

    0, 2, 4 as Frobenius at v has order 3, 2, 1.
    """
    if v == 2 or not arith.is_prime(v):
        raise PreconditionError(f"{v} is not an odd prime")
    if E.conductor % v == 0 or E.disc % v == 0:
        raise PreconditionError(f"{v} divides N * disc; excluded place")
    return {3: 0, 2: 2, 1: 4}[mod2rep.frob_order(E, v)]


@dataclass(frozen=True)
class LocalCondition:
    place: object
    kind: str
    h1_dim: int
    condition_dim: int
    note: str = ""
    certificate: dict | None = None

    def to_dict(self):
        return {"place": self.place, "kind": self.kind, "h1_dim": self.h1_dim,
                "condition_dim": self.condition_dim, "certificate": self.certificate}


UNRAMIFIED = "UnramifiedSelfDual"
ARCHIMEDEAN = "ArchimedeanZero"
TORIC = "ToricLine"
FLAT2 = "FlatAt2"
MULT2 = "MultAt2Line"
CONTEXTS = ("good", "level_raised", "at2", "archimedean")


def classify_local_condition(E: WeierstrassCurve, place, context: str | None = None,
                             sign: int | None = None) -> LocalCondition:
    """Local condition at ``place`` (a prime or "inf").

    ``context`` is one of "good", "level_raised" (with ``sign`` the
    eigenvalue at the new prime), "at2" or "archimedean"; when omitted it
    is inferred from the place.  Cases outside the decision table raise
    NotClassifiedError.
    """
    if context is None:
        context = "archimedean" if place in (INF, "infinity") else ("at2" if int(place) == 2 else "good")
    if context not in CONTEXTS:
        raise PreconditionError(f"unknown context {context!r}")
    if context == "archimedean":
        if E.disc < 0:
            return LocalCondition(INF, ARCHIMEDEAN, 0, 0, "H^1 vanishes at the real place")
        raise NotClassifiedError("not classified: real place with positive discriminant")
    v = int(place)
    if context == "at2":
        if v != 2:
            raise PreconditionError("context at2 needs place 2")
        loc = E.local_data(2)
        if loc.kind == "additive":
            raise NotClassifiedError("not classified: additive reduction at 2")
        h = _h1_dim_any(E, 2)
        if h > 4:
            raise NotClassifiedError("not classified: E[2] is trivial as a G_2-module")
        kind = FLAT2 if loc.kind == "good" else MULT2
        note = "flat cohomology of the finite flat model" if kind == FLAT2 else "unique stable line from the Tate curve"
        return LocalCondition(2, kind, h, h // 2, note)
    if v == 2:
        raise PreconditionError("place 2 needs context at2")
    if context == "level_raised":
        if E.conductor % v == 0 or E.disc % v == 0:
            raise PreconditionError(f"{v} divides N * disc")
        order = mod2rep.frob_order(E, v)
        if order != 2 or sign != 1:
            raise NotClassifiedError(f"not classified: level raising at {v} with Frobenius order {order}, sign {sign}")
        return LocalCondition(v, TORIC, 2, 1, "toric line, distinct from the unramified line")
    if E.conductor % v == 0 or E.disc % v == 0:
        h = _h1_dim_any(E, v)
    else:
        h = local_h1_dim(E, v)
    return LocalCondition(v, UNRAMIFIED, h, h // 2, "unramified classes")


@dataclass(frozen=True)
class InvolutionMap:
    w: int
    alpha1: int
    cofactor: tuple[int, int]  # (s, t) with cofactor x^2 + s x + t
    matrix: tuple[tuple[int, int], tuple[int, int]]

    @property
    def trace(self) -> int:
        return (self.matrix[0][0] + self.matrix[1][1]) % self.w

    def square(self):
        (a, b), (c, d) = self.matrix
        w = self.w
        return ((a * a + b * c) % w, (a * b + b * d) % w), ((c * a + d * c) % w, (c * b + d * d) % w)


def _cubic(obj):
    if isinstance(obj, WeierstrassCurve):
        return mod2rep.two_division_cubic(obj)
    return tuple(obj)


def _one_root(obj, w: int):
    g = _cubic(obj)
    if w % 2 == 0 or not arith.is_prime(w):
        raise PreconditionError(f"{w} must be an odd prime")
    if mod2rep.cubic_discriminant(g) % w == 0:
        raise PreconditionError(f"the cubic is inseparable mod {w}")
    prof = arith.root_profile(g, w)
    if prof.kind != "one":
        raise PreconditionError(f"the cubic must have exactly one root mod {w}, found {prof.kind}")
    return prof


def involution_map(obj, w: int) -> InvolutionMap:
    """Matrix of the involution of P^1 fixing alpha1 and swapping the other two roots.

    ``obj`` is a curve (its scaled 2-division cubic is used) or monic cubic
    coefficients low -> high.  With g = (x - a1)(x^2 + s x + t) mod w the
    matrix is [[a1, t + s a1], [1, -a1]]; it has trace 0 and squares to
    the scalar a1^2 + s a1 + t = g'(a1).
    """
    prof = _one_root(obj, w)
    return involution_matrix(prof.root, prof.cofactor, w)


def involution_matrix(a1: int, cofactor: tuple[int, int], w: int) -> InvolutionMap:
    """The matrix from a root and the quadratic cofactor, with no root-profile check."""
    s, t = cofactor
    m = ((a1 % w, (t + s * a1) % w), (1, -a1 % w))
    inv = InvolutionMap(w, a1 % w, (s % w, t % w), m)
    sq = inv.square()
    if inv.trace != 0 or sq[0][1] or sq[1][0] or sq[0][0] != sq[1][1] or sq[0][0] == 0:
        raise AssertionError(f"not an involution in PGL2: {m}")
    return inv


def swaps_conjugate_roots(inv: InvolutionMap) -> bool:
    """Check in F_{w^2} that the Moebius map exchanges the two conjugate roots."""
    w = inv.w
    s, t = inv.cofactor
    ring = padic.GaloisRing(w, 1, (t, s, 1))
    y = ring.elt([0, 1])  # a root of x^2 + s x + t
    other = ring.sub(ring.from_int(-s), y)
    (a, b), (c, d) = inv.matrix
    num = ring.add(ring.scale(y, a), ring.from_int(b))
    den = ring.add(ring.scale(y, c), ring.from_int(d))
    return ring.mul(num, ring.inv(den)) == other


@dataclass(frozen=True)
class IsotropyCertificate:
    w: int
    alpha1: int
    derivative: int  # g'(alpha1) mod w
    residue_symbol: int
    status: str  # CertifiedIsotropic | NotNorm

    def to_dict(self):
        return {"w": self.w, "alpha1": self.alpha1, "derivative": self.derivative,
                "residue_symbol": self.residue_symbol, "status": self.status}


def qform_isotropy(E, w: int) -> IsotropyCertificate:
    """Certificate that the toric line at w is isotropic for the local quadratic form.

    g'(alpha1) = (alpha1 - alpha2)(alpha1 - alpha3) is a unit mod w.  When
    it is a square mod w it is a norm from the ramified quadratic
    extension, the fixed-point equation is solvable and the line is
    isotropic.  Otherwise the answer is NotNorm, which is not a proof of
    anisotropy.  g'(alpha1) is computed twice: as the cofactor value and as
    the formal derivative of the cubic.
    """
    inv = involution_map(E, w)
    a1 = inv.alpha1
    s, t = inv.cofactor
    via_cofactor = (a1 * a1 + s * a1 + t) % w
    g = _cubic(E)
    via_derivative = arith.peval(arith.pderiv(list(g), w), a1, w)
    if via_cofactor != via_derivative or via_cofactor == 0:
        raise AssertionError("cofactor value and formal derivative disagree or vanish")
    sym = arith.legendre(via_cofactor, w)
    status = "CertifiedIsotropic" if sym == 1 else "NotNorm"
    return IsotropyCertificate(w, a1, via_cofactor, sym, status)
