"""Finite model of Selmer groups cut out by local conditions.

Each place carries a nondegenerate quadratic space H_v over F_{2^d} and a
condition L_v.  A global image G is a subspace of the orthogonal sum which
is totally isotropic for the sum quadratic form and of half dimension; the
Selmer group is {g in G : g_v in L_v for all v}.

Vectors are packed into ints: coordinate j of a place occupies bits
[j*d, (j+1)*d), an element of F_{2^d} being a polynomial in the field
generator.  The same int is then the coordinate vector of the restriction
of scalars to F_2, on which all linear algebra runs, using the trace of the
form.  For F-stable subspaces trace-isotropy and isotropy agree.
"""
from __future__ import annotations

import json
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import product

import numpy as np

from . import arith, kernels
from .errors import LemmaInapplicable, LemmaViolation, PreconditionError

SCHEMA = "selmersys/1"
BILINEAR = "bilinear-self-dual"
QUADRATIC = "Q-isotropic-Lagrangian"
LOWER, RAISE = "lower", "raise"


# ----------------------------------------------------------------- field


@lru_cache(maxsize=None)
def field_modulus(d: int) -> int:
    """Smallest irreducible polynomial of degree d over F_2 (as an int)."""
    if d < 1:
        raise PreconditionError("field degree must be positive")
    if d == 1:
        return 0b10
    for f in range(1 << d, 1 << (d + 1)):
        if f & 1 and arith.f2_is_irreducible(f):
            return f
    raise AssertionError("no irreducible polynomial found")


class Field:
    """F_{2^d} with elements as ints below 2^d."""

    def __init__(self, d: int = 1):
        self.d = d
        self.size = 1 << d
        self.mod = field_modulus(d)

    def mul(self, a: int, b: int) -> int:
        if self.d == 1:
            return a & b
        return arith.f2_mulmod(a, b, self.mod)

    def pow(self, a: int, e: int) -> int:
        if self.d == 1:
            return a if e else 1
        return arith.f2_powmod(a, e, self.mod)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return self.pow(a, self.size - 2) if self.d > 1 else 1

    def sqrt(self, a: int) -> int:
        return self.pow(a, self.size >> 1) if self.d > 1 else a

    def trace(self, a: int) -> int:
        t, x = 0, a
        for _ in range(self.d):
            t ^= x
            x = self.mul(x, x)
        return t & 1


# --------------------------------------------------------- F_2 linear algebra


def _parity(x: int) -> int:
    return x.bit_count() & 1


def rref(rows) -> tuple[int, ...]:
    """Reduced row echelon basis, rows sorted by decreasing pivot (highest bit)."""
    basis: list[int] = []
    for r in rows:
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis = [min(b, b ^ r) for b in basis]
            basis.append(r)
    return tuple(sorted(basis, reverse=True))


def rank(rows) -> int:
    return len(rref(rows))


def nullspace(functionals, n: int) -> tuple[int, ...]:
    """Basis of {x in F_2^n : parity(x & f) = 0 for all f}."""
    red = rref(functionals)
    pivots = {r.bit_length() - 1: r for r in red}
    out = []
    for j in range(n):
        if j in pivots:
            continue
        x = 1 << j
        for p, r in pivots.items():
            if r >> j & 1:
                x |= 1 << p
        out.append(x)
    return rref(out)


def intersect(a, b) -> tuple[int, ...]:
    """Basis of span(a) & span(b) (Zassenhaus)."""
    shift = max([x.bit_length() for x in (*a, *b)] + [1])
    rows = [(x << shift) | x for x in a] + [x << shift for x in b]
    red = rref(rows)
    return rref(r for r in red if r >> shift == 0)


def in_span(x: int, basis) -> bool:
    for b in rref(basis):
        x = min(x, x ^ b)
    return x == 0


# ------------------------------------------------------------- quadratic spaces


@dataclass(frozen=True)
class QuadSpace:
    """Quadratic space of dimension n over F_{2^d}, Q(x) = sum_{i<=j} U_ij x_i x_j."""

    n: int
    U: tuple[tuple[int, ...], ...]
    d: int = 1

    def __post_init__(self):
        if self.n % 2:
            raise PreconditionError("quadratic space dimension must be even")
        if len(self.U) != self.n or any(len(r) != self.n for r in self.U):
            raise PreconditionError("form matrix has the wrong shape")
        if any(self.U[i][j] for i in range(self.n) for j in range(i)):
            raise PreconditionError("form matrix must be upper triangular")
        if any(not 0 <= c < (1 << self.d) for r in self.U for c in r):
            raise PreconditionError("form entries must lie in the field")
        F = Field(self.d)
        object.__setattr__(self, "F", F)
        n2 = self.n * self.d
        object.__setattr__(self, "dim2", n2)
        if self.d == 1:
            U2 = tuple(sum(c << j for j, c in enumerate(r)) for r in self.U)
            gram = [0] * n2
            for a in range(n2):
                for b in range(a + 1, n2):
                    if U2[a] >> b & 1:
                        gram[a] |= 1 << b
                        gram[b] |= 1 << a
            object.__setattr__(self, "U2", U2)
            object.__setattr__(self, "gram", tuple(gram))
            if rank(gram) != n2:
                raise PreconditionError("bilinear form is degenerate")
            return
        # trace form over F_2: diagonal = q2(e_a), upper part = b2(e_a, e_b)
        basis = [1 << a for a in range(n2)]
        qf = self._q_field
        q2 = [F.trace(qf(e)) for e in basis]
        U2 = []
        gram = [0] * n2
        for a in range(n2):
            row = q2[a] << a
            for b in range(a + 1, n2):
                if F.trace(qf(basis[a] ^ basis[b]) ^ qf(basis[a]) ^ qf(basis[b])):
                    row |= 1 << b
                    gram[a] |= 1 << b
                    gram[b] |= 1 << a
            U2.append(row)
        object.__setattr__(self, "U2", tuple(U2))
        object.__setattr__(self, "gram", tuple(gram))
        if rank(gram) != n2:
            raise PreconditionError("bilinear form is degenerate")

    @classmethod
    def hyperbolic(cls, m: int = 1, d: int = 1) -> "QuadSpace":
        """Orthogonal sum of m planes (k^2, xy)."""
        return _hyperbolic(m, d)

    @classmethod
    def _hyperbolic(cls, m: int, d: int) -> "QuadSpace":
        n = 2 * m
        U = [[0] * n for _ in range(n)]
        for i in range(m):
            U[2 * i][2 * i + 1] = 1
        return cls(n, tuple(map(tuple, U)), d)

    @classmethod
    def direct_sum(cls, spaces) -> "QuadSpace":
        return _direct_sum(tuple(spaces))

    @classmethod
    def _direct_sum(cls, spaces) -> "QuadSpace":
        spaces = list(spaces)
        d = spaces[0].d if spaces else 1
        n = sum(s.n for s in spaces)
        U = [[0] * n for _ in range(n)]
        off = 0
        for s in spaces:
            if s.d != d:
                raise PreconditionError("mixed field sizes")
            for i in range(s.n):
                for j in range(s.n):
                    U[off + i][off + j] = s.U[i][j]
            off += s.n
        return cls(n, tuple(map(tuple, U)), d)

    # F-valued evaluation on packed vectors
    def coords(self, x: int) -> list[int]:
        mask = (1 << self.d) - 1
        return [(x >> (j * self.d)) & mask for j in range(self.n)]

    def pack(self, coords) -> int:
        x = 0
        for j, c in enumerate(coords):
            x |= c << (j * self.d)
        return x

    def scale(self, x: int, c: int) -> int:
        if self.d == 1:
            return x if c else 0
        return self.pack(self.F.mul(a, c) for a in self.coords(x))

    def q(self, x: int) -> int:
        if self.d == 1:
            return self.q2(x)
        return self._q_field(x)

    def _q_field(self, x: int) -> int:
        c = self.coords(x)
        acc = 0
        for i in range(self.n):
            if c[i]:
                for j in range(i, self.n):
                    if self.U[i][j] and c[j]:
                        acc ^= self.F.mul(self.U[i][j], self.F.mul(c[i], c[j]))
        return acc

    def b(self, x: int, y: int) -> int:
        if self.d == 1:
            return self.b2(x, y)
        return self.q(x ^ y) ^ self.q(x) ^ self.q(y)

    # F_2 (trace) forms
    def q2(self, x: int) -> int:
        acc = 0
        y = x
        while y:
            low = y & -y
            acc ^= (self.U2[low.bit_length() - 1] & x).bit_count()
            y ^= low
        return acc & 1

    def b2(self, x: int, y: int) -> int:
        f = 0
        z = y
        while z:
            low = z & -z
            f ^= self.gram[low.bit_length() - 1]
            z ^= low
        return _parity(f & x)

    def functional(self, y: int) -> int:
        """The vector f with b2(x, y) = parity(x & f)."""
        f = 0
        while y:
            low = y & -y
            f ^= self.gram[low.bit_length() - 1]
            y ^= low
        return f

    def perp(self, rows) -> tuple[int, ...]:
        return nullspace([self.functional(r) for r in rows], self.dim2)

    def f_span(self, rows) -> tuple[int, ...]:
        """F_2 basis of the F-span of ``rows``."""
        out = []
        for r in rows:
            g = 1
            for _ in range(self.d):
                out.append(self.scale(r, g) if self.d > 1 else r)
                g <<= 1
        return rref(out)

    def is_f_stable(self, rows) -> bool:
        if self.d == 1:
            return True
        return all(in_span(self.scale(r, 2), rows) for r in rows)

    def is_b_isotropic(self, rows) -> bool:
        return all(self.b2(x, y) == 0 for i, x in enumerate(rows) for y in rows[i + 1:])

    def is_q_isotropic(self, rows) -> bool:
        return self.is_b_isotropic(rows) and all(self.q2(r) == 0 for r in rows)

    def lines(self) -> list[tuple[int, ...]]:
        """All F-lines of a 2-dimensional space (F_2 bases)."""
        if self.n != 2:
            raise PreconditionError("lines() needs a 2-dimensional space")
        gens = [self.pack((1, a)) for a in range(1 << self.d)] + [self.pack((0, 1))]
        return [self.f_span([g]) for g in gens]

    def isotropic_lines(self) -> list[tuple[int, ...]]:
        return [ln for ln in self.lines() if self.is_q_isotropic(ln)]


@lru_cache(maxsize=256)
def _hyperbolic(m: int, d: int) -> QuadSpace:
    return QuadSpace._hyperbolic(m, d)


@lru_cache(maxsize=1024)
def _direct_sum(spaces: tuple) -> QuadSpace:
    return QuadSpace._direct_sum(spaces)


# ------------------------------------------------------------------ systems


@dataclass(frozen=True)
class Place:
    label: str
    space: QuadSpace
    condition: tuple[int, ...]  # F_2 rref basis inside the place
    flavor: str = QUADRATIC
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def dim(self) -> int:
        return self.space.n


@dataclass(frozen=True)
class SelmerSystem:
    places: tuple[Place, ...]
    G: tuple[int, ...]  # F_2 rref basis inside the total space
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "G", rref(self.G))
        offs, off = [], 0
        for p in self.places:
            offs.append(off)
            off += p.space.dim2
        object.__setattr__(self, "offsets", tuple(offs))
        object.__setattr__(self, "dim2", off)
        self.validate()

    @property
    def total(self) -> QuadSpace:
        return QuadSpace.direct_sum([p.space for p in self.places]) if self.places else QuadSpace(0, (), self.d)

    def index(self, label) -> int:
        for i, p in enumerate(self.places):
            if p.label == label:
                return i
        raise PreconditionError(f"no place labelled {label!r}")

    def embed(self, i: int, x: int) -> int:
        return x << self.offsets[i]

    def project(self, i: int, x: int) -> int:
        return (x >> self.offsets[i]) & ((1 << self.places[i].space.dim2) - 1)

    def validate(self):
        labels = [p.label for p in self.places]
        if len(set(labels)) != len(labels):
            raise PreconditionError("place labels must be distinct")
        for p in self.places:
            sp = p.space
            if sp.d != self.d:
                raise PreconditionError(f"place {p.label}: field size differs from the system")
            L = rref(p.condition)
            if any(r >> sp.dim2 for r in L):
                raise PreconditionError(f"place {p.label}: condition not inside the local space")
            if not sp.is_f_stable(L):
                raise PreconditionError(f"place {p.label}: condition is not an F-subspace")
            if 2 * len(L) != sp.dim2 or not sp.is_b_isotropic(L):
                raise PreconditionError(f"place {p.label}: condition is not self-dual")
            if p.flavor == QUADRATIC and not sp.is_q_isotropic(L):
                raise PreconditionError(f"place {p.label}: condition is not Q-isotropic")
            if p.flavor not in (QUADRATIC, BILINEAR):
                raise PreconditionError(f"place {p.label}: unknown flavor {p.flavor!r}")
        if any(r >> self.dim2 for r in self.G):
            raise PreconditionError("G is not inside the sum of the local spaces")
        if 2 * len(self.G) != self.dim2:
            raise PreconditionError("G must have half the total dimension")
        if self.places:
            tot = self.total
            if not tot.is_f_stable(self.G):
                raise PreconditionError("G is not an F-subspace")
            if not tot.is_q_isotropic(self.G):
                raise PreconditionError("G is not totally isotropic for the sum quadratic form")

    # ------------------------------------------------------------------
    def condition_rows(self, overrides: dict | None = None) -> list[int]:
        rows = []
        for i, p in enumerate(self.places):
            L = p.condition if not overrides or i not in overrides else overrides[i]
            rows.extend(self.embed(i, r) for r in L)
        return rows

    def _sel2(self, overrides=None) -> int:
        L = self.condition_rows(overrides)
        return len(self.G) + len(rref(L)) - rank(list(self.G) + L)

    def selmer_basis(self) -> tuple[int, ...]:
        return intersect(self.G, self.condition_rows())

    def residue(self, label) -> tuple[int, ...]:
        i = self.index(label)
        return rref(self.project(i, s) for s in self.selmer_basis())

    def replace_condition(self, label, rows, flavor: str | None = None) -> "SelmerSystem":
        i = self.index(label)
        p = self.places[i]
        new = replace(p, condition=p.space.f_span(rows), flavor=flavor or p.flavor)
        return replace(self, places=self.places[:i] + (new,) + self.places[i + 1:])

    # serialization
    def to_dict(self) -> dict:
        width = lambda bits: max(1, (bits + 3) // 4)
        return {
            "schema": SCHEMA,
            "field_degree": self.d,
            "field_modulus": field_modulus(self.d),
            "places": [
                {
                    "label": p.label,
                    "dim": p.space.n,
                    "form": [format(p.space.pack(r), "0%dx" % width(p.space.dim2)) for r in p.space.U],
                    "condition": [format(r, "0%dx" % width(p.space.dim2)) for r in p.condition],
                    "flavor": p.flavor,
                    **({"meta": p.meta} if p.meta else {}),
                }
                for p in self.places
            ],
            "global": [format(r, "0%dx" % width(self.dim2)) for r in self.G],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "SelmerSystem":
        if data.get("schema") != SCHEMA:
            raise PreconditionError(f"unsupported schema {data.get('schema')!r}")
        d = int(data.get("field_degree", 1))
        places = []
        for pd in data["places"]:
            n = int(pd["dim"])
            mask = (1 << d) - 1
            U = tuple(tuple((int(h, 16) >> (j * d)) & mask for j in range(n)) for h in pd["form"])
            sp = QuadSpace(n, U, d)
            places.append(Place(pd["label"], sp, rref(int(h, 16) for h in pd["condition"]),
                                pd.get("flavor", QUADRATIC), pd.get("meta", {})))
        return cls(tuple(places), tuple(int(h, 16) for h in data["global"]), d)

    @classmethod
    def from_json(cls, text: str) -> "SelmerSystem":
        return cls.from_dict(json.loads(text))


def selmer_dim(system: SelmerSystem) -> int:
    """dim over F_{2^d} of {g in G : g_v in L_v for every v}."""
    return system._sel2() // system.d


def greenberg_wiles_delta(system: SelmerSystem, w) -> int:
    """dim of the relaxed minus the strict Selmer group at w; equals half dim H_w."""
    i = system.index(w)
    full = tuple(1 << b for b in range(system.places[i].space.dim2))
    delta = (system._sel2({i: full}) - system._sel2({i: ()})) // system.d
    if 2 * delta != system.places[i].dim:
        raise LemmaViolation(f"relaxed minus strict is {delta}, expected {system.places[i].dim // 2}")
    return delta


# ------------------------------------------------------------------- steps


@dataclass(frozen=True)
class StepOutcome:
    place: str
    old_dim: int
    new_dim: int
    residue_was_zero: bool
    mode: str
    system: SelmerSystem = field(repr=False, compare=False)

    @property
    def change(self) -> int:
        return self.new_dim - self.old_dim

    def to_dict(self) -> dict:
        return {"place": self.place, "old_dim": self.old_dim, "new_dim": self.new_dim,
                "residue_was_zero": self.residue_was_zero, "mode": self.mode}


def apply_step(system: SelmerSystem, w, new_line, mode: str = "quadratic") -> StepOutcome:
    """Replace L_w by the line ``new_line`` and check the predicted change.

    bilinear: needs res_w(Sel) != 0 and predicts a drop by one.
    quadratic: needs both lines and all other conditions Q-isotropic and
    predicts +1 when the residue is zero, -1 otherwise.
    """
    if mode not in ("bilinear", "quadratic"):
        raise PreconditionError(f"unknown mode {mode!r}")
    i = system.index(w)
    p = system.places[i]
    sp = p.space
    if sp.n != 2:
        raise PreconditionError(f"place {w} must be 2-dimensional, it is {sp.n}-dimensional")
    line = sp.f_span(new_line)
    if len(line) != sp.d:
        raise PreconditionError("the new condition must be a line")
    if line == rref(p.condition):
        raise PreconditionError("the new line must differ from the current condition")
    if mode == "quadratic":
        if not (sp.is_q_isotropic(line) and sp.is_q_isotropic(p.condition)):
            raise PreconditionError("both lines must be Q-isotropic")
        for j, other in enumerate(system.places):
            if j != i and not other.space.is_q_isotropic(other.condition):
                raise PreconditionError(f"condition at {other.label} is not Q-isotropic")
    old = selmer_dim(system)
    res_zero = len(system.residue(w)) == 0
    if mode == "bilinear" and res_zero:
        raise LemmaInapplicable(f"residue at {w} is zero; the lowering lemma does not apply")
    new_sys = system.replace_condition(w, line, QUADRATIC if sp.is_q_isotropic(line) else BILINEAR)
    new = selmer_dim(new_sys)
    if mode == "bilinear":
        if new != old - 1:
            raise LemmaViolation(f"expected a drop from {old}, got {new}")
    elif abs(new - old) != 1 or (new == old + 1) != res_zero:
        raise LemmaViolation(f"dichotomy failed: {old} -> {new}, residue zero = {res_zero}")
    return StepOutcome(str(w), old, new, res_zero, mode, new_sys)


def alternative_line(place: Place, quadratic: bool = True):
    """Another (Q-)isotropic line of a 2-dimensional place, or None."""
    if place.space.n != 2:
        return None
    cur = rref(place.condition)
    pool = place.space.isotropic_lines() if quadratic else place.space.lines()
    for ln in pool:
        if ln != cur:
            return ln
    return None


def find_step_place(system: SelmerSystem, want: str):
    """Label of a 2-dimensional place where a lowering (res != 0) or raising
    (res = 0) step is available, or None."""
    if want not in (LOWER, RAISE):
        raise PreconditionError(f"want must be {LOWER!r} or {RAISE!r}")
    sel = system.selmer_basis()
    for i, p in enumerate(system.places):
        if p.space.n != 2:
            continue
        res_zero = all(system.project(i, s) == 0 for s in sel)
        if want == LOWER and not res_zero and alternative_line(p, quadratic=False) is not None:
            return p.label
        if want == RAISE and res_zero and p.space.is_q_isotropic(p.condition) and alternative_line(p) is not None:
            return p.label
    return None


# ------------------------------------------------------------- random systems


def _transvect(sp: QuadSpace, x: int, v: int) -> int:
    c = sp.b(x, v)
    return x ^ sp.scale(v, c) if c else x


def _random_unit_vector(sp: QuadSpace, rng: random.Random) -> int:
    """A random vector with Q(v) = 1."""
    while True:
        v = rng.getrandbits(sp.dim2)
        c = sp.q(v)
        if c:
            return sp.scale(v, sp.F.inv(sp.F.sqrt(c)))


def random_lagrangian(sp: QuadSpace, rng: random.Random, word_length: int = 64) -> tuple[int, ...]:
    """Random maximal Q-isotropic subspace of a hyperbolic presentation.

    Starts from the span of the first vector of every hyperbolic pair and
    applies a random word of orthogonal transvections x -> x + B(x, v) v
    with Q(v) = 1.
    """
    m = sp.n // 2
    for i in range(m):
        if sp.U[2 * i][2 * i + 1] != 1 or sp.U[2 * i][2 * i] or sp.U[2 * i + 1][2 * i + 1]:
            raise PreconditionError("random_lagrangian needs the standard hyperbolic presentation")
    basis = [sp.pack([1 if j == 2 * i else 0 for j in range(sp.n)]) for i in range(m)]
    if m == 0:
        return ()
    for _ in range(word_length):
        v = _random_unit_vector(sp, rng)
        basis = [_transvect(sp, x, v) for x in basis]
    return sp.f_span(basis)


def random_system(place_dims, rng: random.Random | int = 0, d: int = 1, word_length: int = 64,
                  labels=None) -> SelmerSystem:
    """System over hyperbolic places with random Q-Lagrangian conditions and G."""
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    labels = labels or [f"v{i}" for i in range(len(place_dims))]
    places = []
    for lab, n in zip(labels, place_dims):
        sp = QuadSpace.hyperbolic(n // 2, d)
        places.append(Place(lab, sp, random_lagrangian(sp, rng, word_length)))
    total = QuadSpace.direct_sum([p.space for p in places]) if places else None
    G = random_lagrangian(total, rng, word_length) if total else ()
    return SelmerSystem(tuple(places), G, d)


def extend_with_place(system: SelmerSystem, x: int, label: str) -> SelmerSystem:
    """Append a hyperbolic plane with condition span(e1) and extend G.

    The new image is {(g, B(x, g) e1) : g in G} + F (x, e2) for a vector x
    of the old space with Q(x) = 0.  The Selmer group is unchanged, and its
    residue at the new place vanishes iff x is orthogonal to it.
    """
    d = system.d
    plane = QuadSpace.hyperbolic(1, d)
    if system.places:
        tot = system.total
        if tot.q(x) != 0:
            raise PreconditionError("extension vector must be Q-isotropic")
        Gf = system.G
    else:
        tot, Gf = None, ()
        x = 0
    off = system.dim2
    rows = []
    for g in Gf:
        c = tot.b(x, g)
        rows.append(g | (c << off))
    for j in range(d):
        s = 1 << j  # F_2 basis of the field
        xs = tot.scale(x, s) if tot is not None else 0
        rows.append(xs | (s << (off + d)))
    cond = plane.f_span([plane.pack((1, 0))])
    place = Place(label, plane, cond, QUADRATIC, {"role": "level-raised"})
    return SelmerSystem(system.places + (place,), tuple(rows), d)


def _extension_vector(system: SelmerSystem, want: str, rng: random.Random) -> int:
    if not system.places:
        return 0
    tot = system.total
    sel = system.selmer_basis()
    if want == RAISE:
        perp = tot.perp(sel)
        for _ in range(64):
            x = 0
            for r in perp:
                if rng.getrandbits(1):
                    x ^= r
            if tot.q(x) == 0:
                return x
        return 0
    if not sel:
        raise PreconditionError("cannot lower from a zero Selmer group")
    s = 0
    while s == 0:
        for r in sel:
            if rng.getrandbits(1):
                s ^= r
    while True:
        y = rng.getrandbits(tot.dim2)
        c = tot.b(y, s)
        if c:
            break
    y = tot.scale(y, tot.F.inv(c))
    return y ^ tot.scale(s, tot.q(y)) if tot.q(y) else y


@dataclass
class WalkTrace:
    seed_dim: int
    target: int
    steps: list[StepOutcome]
    system: SelmerSystem

    @property
    def final_dim(self) -> int:
        return selmer_dim(self.system)

    def to_dict(self) -> dict:
        return {"seed_dim": self.seed_dim, "target": self.target, "final_dim": self.final_dim,
                "steps": [s.to_dict() for s in self.steps]}


def rank_walk(seed: SelmerSystem, target: int, rng_seed: int = 0, max_steps: int = 1000) -> WalkTrace:
    """Reach Selmer dimension ``target`` by appending level-raised places.

    Each step appends a hyperbolic plane with the unramified line, extends
    G (residue zero to raise, nonzero to lower) and swaps to the toric
    line; every step changes the dimension by exactly one.
    """
    if target < 0:
        raise PreconditionError("target must be nonnegative")
    rng = random.Random(rng_seed)
    sys_ = seed
    start = selmer_dim(seed)
    steps: list[StepOutcome] = []
    n = 0
    while selmer_dim(sys_) != target:
        if n >= max_steps:
            raise AssertionError("rank walk did not terminate")
        want = RAISE if selmer_dim(sys_) < target else LOWER
        label = f"q{n + 1}"
        while label in {p.label for p in sys_.places}:
            label += "'"
        x = _extension_vector(sys_, want, rng)
        ext = extend_with_place(sys_, x, label)
        plane = ext.places[-1].space
        toric = plane.f_span([plane.pack((0, 1))])
        out = apply_step(ext, label, toric, "quadratic")
        if out.residue_was_zero != (want == RAISE):
            raise AssertionError("extension did not produce the requested residue")
        steps.append(out)
        sys_ = out.system
        n += 1
    for p in sys_.places[len(seed.places):]:
        assert p.space.n == 2 and p.space.is_q_isotropic(p.condition)
    return WalkTrace(start, target, steps, sys_)


def random_step_trials(count: int, rng_seed: int = 0, max_places: int = 4, word_length: int = 8) -> dict:
    """Apply quadratic steps on random systems; count dichotomy outcomes."""
    rng = random.Random(rng_seed)
    counts = {"trials": 0, "raised": 0, "lowered": 0}
    for _ in range(count):
        dims = [rng.choice((2, 2, 4)) for _ in range(rng.randint(0, max_places - 1))] + [2]
        s = random_system(dims, rng, 1, word_length)
        w = s.places[-1]
        out = apply_step(s, w.label, alternative_line(w), "quadratic")
        counts["trials"] += 1
        counts["raised" if out.change > 0 else "lowered"] += 1
    return counts


# ------------------------------------------------------------- enumeration


def isotropic_subspaces(sp: QuadSpace | None, n: int, dim: int, kind: str) -> list[tuple[int, ...]]:
    """All subspaces of F_2^n of dimension ``dim``, as rref tuples.

    kind "all" imposes nothing, "bilinear" requires B-isotropy and
    "quadratic" Q-isotropy.  Rows are built by increasing pivot with
    earlier pivot columns cleared, which gives each subspace once.
    """
    out = []

    def ok(r, rows):
        if kind == "all":
            return True
        if any(sp.b2(r, s) for s in rows):
            return False
        return kind == "bilinear" or sp.q2(r) == 0

    def rec(rows, last, pivmask):
        if len(rows) == dim:
            out.append(tuple(sorted(rows, reverse=True)))
            return
        for p in range(last + 1, n - (dim - len(rows) - 1)):
            free = [b for b in range(p) if not pivmask >> b & 1]
            for m in range(1 << len(free)):
                r = 1 << p
                for k, b in enumerate(free):
                    if m >> k & 1:
                        r |= 1 << b
                if ok(r, rows):
                    rec(rows + [r], p, pivmask | (1 << p))

    rec([], -1, 0)
    return out


def _all_subspaces(n: int) -> list[tuple[int, ...]]:
    out = []
    for k in range(n + 1):
        out.extend(isotropic_subspaces(None, n, k, "all"))
    return out


def _decompositions(total: int) -> list[tuple[int, ...]]:
    out = []

    def rec(rem, cur, mx):
        if rem == 0:
            out.append(tuple(cur))
            return
        for part in (4, 2):
            if part <= min(rem, mx):
                rec(rem - part, cur + [part], part)

    rec(total, [], 4)
    return out


CHECKS = ("relaxed_strict_identity", "lowering_bound", "lowering_drop", "quadratic_dichotomy",
          "bilinear_only_dichotomy")
LEMMA_CHECKS = CHECKS[:4]


def _empty_counts():
    return {c: [0, 0] for c in CHECKS}


def _evaluate_shard(dims: tuple[int, ...], gs: list[tuple[int, ...]]) -> dict:
    """All checks for the given list of global images (one shard)."""
    T = sum(dims)
    total = QuadSpace.hyperbolic(T // 2)
    counts = _empty_counts()
    gq = np.array([total.is_q_isotropic(g) for g in gs])
    Gmat = np.array(gs, dtype=np.uint64).reshape(len(gs), T // 2)
    offs = np.cumsum((0,) + dims[:-1])
    locals_ = []
    for n in dims:
        sp = QuadSpace.hyperbolic(n // 2)
        LB = isotropic_subspaces(sp, n, n // 2, "bilinear")
        locals_.append((sp, LB, [sp.is_q_isotropic(L) for L in LB]))
    for w, nw in enumerate(dims):
        others = [i for i in range(len(dims)) if i != w]
        tuples, tq = [], []
        for combo in product(*[range(len(locals_[i][1])) for i in others]):
            rows = []
            qok = True
            for i, c in zip(others, combo):
                rows.extend(int(r) << int(offs[i]) for r in locals_[i][1][c])
                qok &= locals_[i][2][c]
            tuples.append(rows)
            tq.append(qok)
        subs = _all_subspaces(nw)
        sub_rows = [[int(r) << int(offs[w]) for r in S] for S in subs]
        kmax = max(len(s) for s in subs)
        nT, nX, nG = len(tuples), len(subs), len(gs)
        width = T // 2 + len(tuples[0]) + kmax
        Tmat = np.array(tuples, dtype=np.uint64).reshape(nT, -1)
        Xmat = np.zeros((nX, kmax), dtype=np.uint64)
        for j, s in enumerate(sub_rows):
            Xmat[j, : len(s)] = s
        mats = np.zeros((nG, nT, nX, width), dtype=np.uint64)
        mats[..., : T // 2] = Gmat[:, None, None, :]
        mats[..., T // 2: T // 2 + Tmat.shape[1]] = Tmat[None, :, None, :]
        mats[..., T // 2 + Tmat.shape[1]:] = Xmat[None, None, :, :]
        ranks = kernels.gf2_rank_batch(mats.reshape(-1, width)).reshape(nG, nT, nX).astype(np.int64)
        dimL = np.array([len(s) for s in subs], dtype=np.int64)
        sel = T // 2 + (T - nw) // 2 + dimL[None, None, :] - ranks
        i0 = next(j for j, s in enumerate(subs) if len(s) == 0)
        iF = next(j for j, s in enumerate(subs) if len(s) == nw)
        inst = nG * nT
        counts["relaxed_strict_identity"][0] += inst
        counts["relaxed_strict_identity"][1] += int(np.count_nonzero(sel[..., iF] - sel[..., i0] != nw // 2))
        spread = sel.max(axis=2) - sel.min(axis=2)
        counts["lowering_bound"][0] += inst
        counts["lowering_bound"][1] += int(np.count_nonzero(spread > nw // 2))
        if nw != 2:
            continue
        sp_w = locals_[w][0]
        line_idx = [j for j, s in enumerate(subs) if len(s) == 1]
        qlines = {s for s in sp_w.isotropic_lines()}
        qidx = [j for j in line_idx if subs[j] in qlines]
        s0 = sel[..., i0]
        qmask = gq[:, None] & np.array(tq)[None, :]
        for a in line_idx:
            for b in line_idx:
                if a == b:
                    continue
                sa, sb = sel[..., a], sel[..., b]
                resnz = sa > s0
                counts["lowering_drop"][0] += int(np.count_nonzero(resnz))
                counts["lowering_drop"][1] += int(np.count_nonzero(resnz & (sb != sa - 1)))
                good = (np.abs(sb - sa) == 1) & ((sb == sa + 1) == ~resnz)
                counts["bilinear_only_dichotomy"][0] += inst
                counts["bilinear_only_dichotomy"][1] += int(np.count_nonzero(~good))
                if a in qidx and b in qidx:
                    counts["quadratic_dichotomy"][0] += int(np.count_nonzero(qmask))
                    counts["quadratic_dichotomy"][1] += int(np.count_nonzero(qmask & ~good))
    return counts


def _lagrangian_count(m: int, quadratic: bool) -> int:
    out = 1
    for i in range(m):
        out *= (2**i + 1) if quadratic else (2 ** (i + 1) + 1)
    return out


def enumerate_verify(max_total_dim: int = 6, jobs: int = 1, raise_on_failure: bool = True) -> dict:
    """Exhaustively check the model identities over F_2 up to total dimension ``max_total_dim``.

    For every decomposition of the total space into hyperbolic places of
    dimension 2 or 4, every global image G maximal isotropic for the
    bilinear form (the quadratic checks restrict to Q-isotropic G), every
    tuple of self-dual conditions away from w and every subspace at w.
    """
    if max_total_dim > 8 or max_total_dim < 0 or max_total_dim % 2:
        raise PreconditionError("max_total_dim must be even and at most 8")
    t0 = time.perf_counter()
    counts = _empty_counts()
    per_dim = {}
    for T in range(2, max_total_dim + 1, 2):
        total = QuadSpace.hyperbolic(T // 2)
        GB = isotropic_subspaces(total, T, T // 2, "bilinear")
        nq = sum(total.is_q_isotropic(g) for g in GB)
        if len(GB) != _lagrangian_count(T // 2, False) or nq != _lagrangian_count(T // 2, True):
            raise AssertionError(f"Lagrangian count mismatch at dimension {T}")
        per_dim[T] = {"bilinear_lagrangians": len(GB), "quadratic_lagrangians": nq,
                      "decompositions": [list(x) for x in _decompositions(T)]}
        shards: dict[int, list] = {}
        for g in GB:
            shards.setdefault(g[0], []).append(g)
        tasks = [(dims, shards[k]) for dims in _decompositions(T) for k in sorted(shards)]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                results = list(ex.map(_evaluate_shard, *zip(*tasks)))
        else:
            results = [_evaluate_shard(*t) for t in tasks]
        for r in results:
            for c in CHECKS:
                counts[c][0] += r[c][0]
                counts[c][1] += r[c][1]
    report = {
        "max_total_dim": max_total_dim,
        "field": 2,
        "dimensions": per_dim,
        "checks": {c: {"instances": counts[c][0], "failures": counts[c][1]} for c in LEMMA_CHECKS},
        "bilinear_only_dichotomy": {"instances": counts["bilinear_only_dichotomy"][0],
                                    "failures": counts["bilinear_only_dichotomy"][1]},
        "ok": all(counts[c][1] == 0 for c in LEMMA_CHECKS),
        "seconds": round(time.perf_counter() - t0, 3),
    }
    if raise_on_failure and not report["ok"]:
        raise LemmaViolation(f"enumeration found counterexamples: {report['checks']}")
    return report
