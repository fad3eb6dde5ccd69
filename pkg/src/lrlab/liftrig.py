"""Exhaustive check of tame lifts over the Galois ring GR(2^k, 2).

A lift is a pair r(sigma) diagonal with residues w, w^2 (w a primitive cube
root of unity) and r(tau) = I + M with M = 0 mod 2, subject to
r(sigma) r(tau) r(sigma)^-1 = r(tau)^q.  The constrained variant adds
det r(tau) = 1.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from . import arith, kernels
from .errors import LemmaViolation, PreconditionError
from .padic import STANDARD_MODULI, GaloisRing

MAX_PRECISION = 4


def ring(k: int) -> GaloisRing:
    """GR(2^k, 2) = (Z/2^k)[w]/(w^2 + w + 1); elements are pairs (a, b) = a + b w."""
    return GaloisRing(2, k, STANDARD_MODULI[(2, 2)])


def _check_q(q: int):
    if q < 3 or q % 4 != 3:
        raise PreconditionError(f"q = {q} must be a prime power congruent to 3 mod 4")
    f = arith.factorize(q)
    if len(f) != 1:
        raise PreconditionError(f"q = {q} must be a prime power congruent to 3 mod 4")


def _check_k(k: int):
    if not 1 <= k <= MAX_PRECISION:
        raise PreconditionError(f"precision {k} outside 1..{MAX_PRECISION} (4^(4(k-1)) candidates)")


# 2x2 matrices over the ring as ((x00, x01), (x10, x11))


def mat_mul(R: GaloisRing, X, Y):
    return tuple(
        tuple(R.add(R.mul(X[i][0], Y[0][j]), R.mul(X[i][1], Y[1][j])) for j in range(2)) for i in range(2)
    )


def mat_pow(R: GaloisRing, X, e: int):
    out = ((R.one, R.zero), (R.zero, R.one))
    base = X
    while e:
        if e & 1:
            out = mat_mul(R, out, base)
        base = mat_mul(R, base, base)
        e >>= 1
    return out


def mat_det(R: GaloisRing, X):
    return R.sub(R.mul(X[0][0], X[1][1]), R.mul(X[0][1], X[1][0]))


def identity(R: GaloisRing):
    return ((R.one, R.zero), (R.zero, R.one))


@dataclass(frozen=True)
class SigmaLift:
    """Diagonal r(sigma) = diag(alpha, beta) with alpha * beta = q^-1."""

    q: int
    k: int
    alpha: tuple
    beta: tuple

    def matrix(self):
        R = ring(self.k)
        return ((self.alpha, R.zero), (R.zero, self.beta))


def standard_sigma(q: int, k: int) -> SigmaLift:
    R = ring(k)
    w = R.elt([0, 1])
    qinv = R.inv(R.from_int(q))
    return SigmaLift(q, k, w, R.mul(qinv, R.mul(w, w)))


def random_sigma(q: int, k: int, rng: random.Random) -> SigmaLift:
    """Random admissible r(sigma): residues w, w^2 in either order, det q^-1."""
    R = ring(k)
    w = R.elt([0, 1])
    base = w if rng.getrandbits(1) else R.mul(w, w)
    alpha = R.add(base, R.scale(R.elt([rng.randrange(R.q), rng.randrange(R.q)]), 2))
    beta = R.mul(R.inv(R.from_int(q)), R.inv(alpha))
    return SigmaLift(q, k, alpha, beta)


@dataclass(frozen=True)
class TameLiftInstance:
    q: int
    k: int
    r_sigma: tuple
    r_tau: tuple

    def relation_holds(self) -> bool:
        R = ring(self.k)
        S = self.r_sigma
        Sinv = ((R.inv(S[0][0]), R.zero), (R.zero, R.inv(S[1][1])))
        lhs = mat_mul(R, mat_mul(R, S, self.r_tau), Sinv)
        return lhs == mat_pow(R, self.r_tau, self.q)

    @property
    def det(self):
        return mat_det(ring(self.k), self.r_tau)

    def is_diagonal(self) -> bool:
        R = ring(self.k)
        return self.r_tau[0][1] == R.zero and self.r_tau[1][0] == R.zero

    def is_plus_minus_identity(self, modulus_power: int | None = None) -> bool:
        """r(tau) = I or -I, optionally only modulo 2^modulus_power."""
        R = ring(self.k)
        m = 1 << (self.k if modulus_power is None else modulus_power)
        flat = [x % m for e in (self.r_tau[0] + self.r_tau[1]) for x in e]
        I = [1, 0, 0, 0, 0, 0, 1, 0]
        minus = [(-x) % m for x in I]
        return flat == [x % m for x in I] or flat == minus

    def to_dict(self) -> dict:
        return {"r_tau": [[list(e) for e in row] for row in self.r_tau]}


def _kernel_args(sig: SigmaLift):
    R = ring(sig.k)
    return sig.alpha, sig.beta, R.inv(sig.alpha), R.inv(sig.beta)


def enumerate_tame_lifts(q: int, k: int, det_constrained: bool, sigma: SigmaLift | None = None,
                         shards: int = 1) -> list[TameLiftInstance]:
    """All r(tau) = I + M, M = 0 mod 2, solving the tame relation for a fixed r(sigma).

    The 4^(4(k-1)) candidates are scanned by the compiled kernel in
    ``shards`` contiguous index ranges.
    """
    _check_q(q)
    _check_k(k)
    sig = sigma or standard_sigma(q, k)
    if (sig.q, sig.k) != (q, k):
        raise PreconditionError("r(sigma) was built for another (q, k)")
    alpha, beta, ainv, binv = _kernel_args(sig)
    total = 1 << (8 * (k - 1))
    bounds = np.linspace(0, total, shards + 1, dtype=np.int64)
    rows = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        rows.append(kernels.lift_scan(q, k, alpha, beta, ainv, binv, det_constrained, int(lo), int(hi)))
    sols = np.concatenate(rows) if rows else np.zeros((0, 8), dtype=np.int64)
    S = sig.matrix()
    out = []
    for r in sols.tolist():
        tau = (((r[0], r[1]), (r[2], r[3])), ((r[4], r[5]), (r[6], r[7])))
        out.append(TameLiftInstance(q, k, S, tau))
    return sorted(out, key=lambda t: t.to_dict()["r_tau"])


def enumerate_reference(q: int, k: int, det_constrained: bool, sigma: SigmaLift | None = None) -> list[TameLiftInstance]:
    """Slow enumeration with the generic ring arithmetic (for cross-checks at k <= 2)."""
    _check_q(q)
    if k > 2:
        raise PreconditionError("reference enumeration is limited to k <= 2")
    R = ring(k)
    sig = sigma or standard_sigma(q, k)
    S = sig.matrix()
    evens = [R.elt([2 * a, 2 * b]) for a in range(1 << (k - 1)) for b in range(1 << (k - 1))]
    out = []
    for m00 in evens:
        for m01 in evens:
            for m10 in evens:
                for m11 in evens:
                    tau = ((R.add(R.one, m00), m01), (m10, R.add(R.one, m11)))
                    inst = TameLiftInstance(q, k, S, tau)
                    if det_constrained and inst.det != R.one:
                        continue
                    if inst.relation_holds():
                        out.append(inst)
    return sorted(out, key=lambda t: t.to_dict()["r_tau"])


def unit_factors_ok(sig: SigmaLift) -> bool:
    """alpha/beta - q and beta/alpha - q are units (residues w^2 - 1 and w - 1)."""
    R = ring(sig.k)
    qq = R.from_int(sig.q)
    a = R.sub(R.mul(sig.alpha, R.inv(sig.beta)), qq)
    b = R.sub(R.mul(R.inv(sig.alpha), sig.beta), qq)
    return R.is_unit(a) and R.is_unit(b)


def rigidity_report(q: int, k: int, sigma: SigmaLift | None = None) -> dict:
    """Constrained solutions and how they compare with {I, -I}."""
    sols = enumerate_tame_lifts(q, k, True, sigma)
    outside = [s for s in sols if not s.is_plus_minus_identity()]
    return {
        "q": q,
        "k": k,
        "constrained": True,
        "solution_count": len(sols),
        "all_in_mu2": not outside,
        "all_diagonal": all(s.is_diagonal() for s in sols),
        "all_pm_identity_mod_2^(k-1)": all(s.is_plus_minus_identity(k - 1) for s in sols),
        "witnesses": [s.to_dict()["r_tau"] for s in outside[:4]],
    }


def verify_rigidity(q: int, k: int, sigma: SigmaLift | None = None) -> dict:
    """Assert every constrained solution is I or -I; raise with a witness otherwise."""
    rep = rigidity_report(q, k, sigma)
    if not rep["all_diagonal"]:
        raise LemmaViolation(f"off-diagonal entries survive at precision {k}: {rep}")
    if not rep["all_in_mu2"]:
        err = LemmaViolation(f"constrained solution outside {{I, -I}} at (q, k) = ({q}, {k}): {rep['witnesses'][0]}")
        err.report = rep
        raise err
    return rep


def truncation_check(q: int, k: int) -> dict:
    """Reductions mod 2^k of the constrained solutions at precision k + 1."""
    if k + 1 > MAX_PRECISION:
        raise PreconditionError(f"needs precision {k + 1} <= {MAX_PRECISION}")
    sols = enumerate_tame_lifts(q, k + 1, True)
    m = 1 << k
    reduced = sorted({tuple(x % m for e in (s.r_tau[0] + s.r_tau[1]) for x in e) for s in sols})
    I = (1, 0, 0, 0, 0, 0, 1, 0)
    minus = tuple((-x) % m for x in I)
    return {"q": q, "k": k, "reductions": [list(r) for r in reduced],
            "equals_pm_identity": set(reduced) == {I, minus}}


def det_trick_check(q: int, k: int, sigma: SigmaLift | None = None) -> dict:
    """Unconstrained solutions: det r(tau)^2 = 1 for all of them."""
    sols = enumerate_tame_lifts(q, k, False, sigma)
    R = ring(k)
    dets = sorted({s.det for s in sols})
    bad = [d for d in dets if R.mul(d, d) != R.one]
    rep = {
        "q": q,
        "k": k,
        "constrained": False,
        "solution_count": len(sols),
        "all_diagonal": all(s.is_diagonal() for s in sols),
        "determinants": [list(d) for d in dets],
        "det_order_le_2": not bad,
    }
    if bad:
        raise LemmaViolation(f"determinant of order > 2: {bad[0]}")
    return rep
