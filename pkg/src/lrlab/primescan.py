"""Scans over primes: level-raising primes, auxiliary primes, densities."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import arith, mod2rep
from .curves import WeierstrassCurve
from .errors import ConsistencyError, PreconditionError

log = logging.getLogger(__name__)

#: Chebotarev density of Frobenius classes of order 1 or 2 in S3
LEVEL_RAISING_DENSITY = 2 / 3


def _traces(E: WeierstrassCurve, primes: list[int], jobs: int = 1) -> dict[int, int]:
    from .curves import ap_many

    fast = [p for p in primes if p > 3 and E.disc % p]
    out = {}
    if fast:
        if jobs > 1 and len(fast) > 2000:
            chunks = np.array_split(np.array(fast, dtype=np.int64), jobs)
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                parts = ex.map(ap_many, [E.ainvs] * len(chunks), [c.tolist() for c in chunks])
                vals = np.concatenate(list(parts))
        else:
            vals = ap_many(E.ainvs, fast)
        out.update(zip(fast, (int(v) for v in vals)))
    for p in primes:
        if p not in out:
            out[p] = E.ap(p)
    return out


def level_raising_primes(E: WeierstrassCurve, bound: int, verify: bool = True, jobs: int = 1) -> list[int]:
    """Primes q <= bound, q not dividing 2N, with a_q even.

    With ``verify`` each hit is cross-checked against the Frobenius order
    (which must be 1 or 2) computed from the 2-division cubic.
    """
    N = E.conductor
    primes = [int(q) for q in arith.primes_up_to(bound) if q > 2 and N % q]
    aps = _traces(E, primes, jobs)
    out = [q for q in primes if aps[q] % 2 == 0]
    if verify:
        for q in primes:
            if E.disc % q == 0:
                continue  # non-minimal model at q; the trace is from the minimal one
            order = mod2rep.frob_order(E, q, method="gcd")
            if (aps[q] % 2 == 0) != (order in (1, 2)):
                raise ConsistencyError(f"a_{q} = {aps[q]} but Frobenius order {order}")
    return out


@dataclass(frozen=True)
class AuxSpec:
    """Conditions on an auxiliary prime q0.

    ``sigma`` are the level-raising primes already chosen, ``p1`` is the
    prime of the conductor exempt from the residue-symbol condition.
    """

    sigma: tuple[int, ...]
    p1: int
    minimum: int = 2
    strict: bool = False


def _aux_conditions(E: WeierstrassCurve, spec: AuxSpec) -> list[int]:
    N = E.conductor
    if spec.p1 not in E.conductor_factorization():
        raise PreconditionError(f"p1 = {spec.p1} does not divide the conductor {N}")
    if E.conductor_factorization()[spec.p1] % 2 == 0:
        raise PreconditionError(f"p1 = {spec.p1} must divide the conductor to an odd power")
    if spec.strict and E.disc < 0:
        raise PreconditionError("the strict variant needs a positive discriminant")
    conditioned = sorted(set(E.conductor_factorization()) | set(spec.sigma))
    if not spec.strict:
        conditioned.remove(spec.p1)
    return conditioned


def is_auxiliary(E: WeierstrassCurve, q: int, spec: AuxSpec) -> bool:
    cond = _aux_conditions(E, spec)
    return _is_aux(E, q, cond)


def _is_aux(E, q, cond) -> bool:
    if q % 4 != 3 or E.disc % q == 0 or q in cond:
        return False
    if mod2rep.frob_order(E, q, method="gcd") != 3:
        return False
    return all(arith.legendre(p, q) == 1 for p in cond)


def auxiliary_primes(E: WeierstrassCurve, spec: AuxSpec, bound: int) -> list[int]:
    """Primes q0 <= bound: q0 = 3 mod 4, Frobenius of order 3, and (p/q0) = 1
    for every p dividing N * prod(sigma) other than p1."""
    cond = _aux_conditions(E, spec)
    out = [int(q) for q in arith.primes_up_to(bound) if q >= spec.minimum and _is_aux(E, int(q), cond)]
    if not out:
        log.warning("no auxiliary prime up to %d; such primes have positive density %.4f, raise the bound",
                    bound, aux_prediction(E, spec))
    return out


def aux_prediction(E: WeierstrassCurve, spec: AuxSpec) -> float:
    """Chebotarev prediction (1/3) * (1/2)^s, s = number of quadratic conditions."""
    s = len(_aux_conditions(E, spec)) + 1
    return (1 / 3) * 0.5**s


def small_sample(count: int) -> bool:
    return count < 100


FROB_DENSITIES = {1: 1 / 6, 2: 1 / 2, 3: 1 / 3}


def density_report(E: WeierstrassCurve, bound: int, spec: AuxSpec | None = None, jobs: int = 1) -> dict:
    """Observed versus predicted frequencies of Frobenius orders, level-raising
    primes and (with ``spec``) auxiliary primes.

    Frobenius orders and level-raising primes are counted over odd q not
    dividing N * disc; auxiliary primes over all primes up to ``bound``.
    A tolerance of 0.03 applies unless the sample is small.
    """
    N = E.conductor
    primes = [int(q) for q in arith.primes_up_to(bound) if q > 2 and (N * E.disc) % q]
    orders = {1: 0, 2: 0, 3: 0}
    for q in primes:
        orders[mod2rep.frob_order(E, q, method="gcd")] += 1
    lr = set(level_raising_primes(E, bound, jobs=jobs))
    total = len(primes)
    counts = {f"frob_order_{k}": v for k, v in orders.items()}
    counts["level_raising"] = sum(1 for q in primes if q in lr)
    predictions = {f"frob_order_{k}": v for k, v in FROB_DENSITIES.items()}
    predictions["level_raising"] = LEVEL_RAISING_DENSITY
    frequencies = {k: (v / total if total else 0.0) for k, v in counts.items()}
    report = {"curve": E.name(), "bound": bound, "primes_considered": total, "counts": counts,
              "frequencies": frequencies, "predictions": predictions}
    if spec is not None:
        aux = auxiliary_primes(E, spec, bound)
        all_primes = len(arith.primes_up_to(bound))
        report["auxiliary"] = {"sigma": list(spec.sigma), "p1": spec.p1, "first": aux[:10],
                               "all_primes": all_primes}
        counts["auxiliary"] = len(aux)
        frequencies["auxiliary"] = len(aux) / all_primes if all_primes else 0.0
        predictions["auxiliary"] = aux_prediction(E, spec)
    report["small_sample"] = small_sample(total)
    report["tolerance"] = None if report["small_sample"] else 0.03
    report["within_tolerance"] = None if report["small_sample"] else all(
        abs(frequencies[k] - predictions[k]) <= 0.03 for k in predictions if k != "auxiliary")
    return report
