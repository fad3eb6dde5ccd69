"""Command-line entry point: ``lrlab <subcommand> ...`` (also ``python -m lrlab``).

JSON goes to standard output (``--format table`` for humans), logs go to
standard error.  Exit status: 0 success, 1 verification failure or domain
error, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from dataclasses import asdict

from . import lmfdb, liftrig, localcond, mod2rep, primescan, selmersys
from .curves import WeierstrassCurve
from .errors import (ConsistencyError, LemmaInapplicable, LemmaViolation, LrlabError, NotClassifiedError,
                     PreconditionError)

log = logging.getLogger("lrlab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# descriptive tags naming the fact each report checks
ANCHORS = {
    "analyze": "standing-hypotheses",
    "raising-primes": "level-raising-prime",
    "aux-primes": "auxiliary-prime",
    "local": "local-condition-table",
    "qform": "toric-line-isotropy",
    "selmer-sim": "selmer-rank-step",
    "lift-check": "tame-lift-rigidity",
    "fetch": "newform-data",
    "audit": "congruence-and-sign-audit",
}
ERROR_ANCHORS = {
    NotClassifiedError: "local-condition-table",
    LemmaViolation: "model-lemma",
    LemmaInapplicable: "model-lemma",
    ConsistencyError: "cross-check",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _client(args) -> lmfdb.Client:
    return lmfdb.Client(cache_dir=args.cache_dir, offline=True if args.offline else None)


def resolve_curve(spec: str, args) -> WeierstrassCurve:
    """"a1,a2,a3,a4,a6" or a curve label looked up through the data client."""
    if "," in spec or spec.strip().startswith("["):
        return WeierstrassCurve.parse(spec)
    return _client(args).fetch_curve(spec.strip())


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


# ----------------------------------------------------------------- commands


def cmd_analyze(args) -> tuple[dict, int]:
    E = resolve_curve(args.curve, args)
    inv = E.invariants
    rep = mod2rep.assumption_check(E, args.precision)
    prof = mod2rep.mod2_profile(E, args.precision)
    local = []
    for p in E.bad_primes():
        ld = E.local_data(p)
        local.append({"p": p, "kind": ld.kind, "kodaira": ld.kodaira, "conductor_exponent": ld.conductor_exponent,
                      "tamagawa": ld.tamagawa, "components": ld.component_group_order})
    out = {
        "curve": E.name(),
        "ainvs": list(E.ainvs),
        "invariants": {"b2": inv.b2, "b4": inv.b4, "b6": inv.b6, "b8": inv.b8, "c4": inv.c4, "c6": inv.c6,
                       "disc": inv.disc, "j": str(inv.j)},
        "conductor": E.conductor,
        "local_data": local,
        "two_division_cubic": list(mod2rep.two_division_cubic(E)),
        "mod2_image": prof.image,
        "delta_squareclass": prof.delta_squareclass,
        "two_adic_profile": asdict(prof.two_adic) if prof.two_adic else None,
        "assumptions": rep.to_dict(),
    }
    return out, EXIT_OK


def cmd_raising_primes(args):
    E = resolve_curve(args.curve, args)
    primes = primescan.level_raising_primes(E, args.bound, jobs=args.jobs)
    out = {"curve": E.name(), "bound": args.bound, "primes": primes}
    if args.density:
        rep = primescan.density_report(E, args.bound, jobs=args.jobs)
        out["density"] = {k: rep[k] for k in ("counts", "frequencies", "predictions", "primes_considered",
                                              "small_sample", "within_tolerance")}
    return out, EXIT_OK


def cmd_aux_primes(args):
    E = resolve_curve(args.curve, args)
    spec = primescan.AuxSpec(tuple(_int_list(args.sigma)), args.p1, args.min, args.strict)
    qs = primescan.auxiliary_primes(E, spec, args.bound)
    for q in qs:
        if not primescan.is_auxiliary(E, q, spec):
            raise ConsistencyError(f"{q} failed re-verification")
    out = {"curve": E.name(), "sigma": list(spec.sigma), "p1": spec.p1, "minimum": spec.minimum,
           "strict": spec.strict, "bound": args.bound, "primes": qs[: args.limit], "count": len(qs),
           "first": qs[0] if qs else None, "predicted_density": primescan.aux_prediction(E, spec)}
    return out, EXIT_OK


def cmd_local(args):
    E = resolve_curve(args.curve, args)
    place = args.place if args.place in ("inf", "infinity") else int(args.place)
    cond = localcond.classify_local_condition(E, place, args.context, args.sign)
    return {"curve": E.name(), **cond.to_dict(), "note": cond.note}, EXIT_OK


def cmd_qform(args):
    E = resolve_curve(args.curve, args)
    inv = localcond.involution_map(E, args.place)
    cert = localcond.qform_isotropy(E, args.place)
    out = {"curve": E.name(), "place": args.place, "alpha1": inv.alpha1, "cofactor": list(inv.cofactor),
           "matrix": [list(r) for r in inv.matrix], "square": [list(r) for r in inv.square()],
           "swaps_conjugate_roots": localcond.swaps_conjugate_roots(inv), "certificate": cert.to_dict()}
    return out, EXIT_OK


def cmd_selmer_sim(args):
    if args.exhaustive is not None:
        if args.exhaustive > 8:
            raise UsageError("--exhaustive is limited to total dimension 8")
        rep = selmersys.enumerate_verify(args.exhaustive, jobs=args.jobs, raise_on_failure=False)
        rep.pop("seconds", None)
        return rep, EXIT_OK if rep["ok"] else EXIT_FAIL
    dims = _int_list(args.places) if args.places else []
    seed = selmersys.random_system(dims, random.Random(args.seed), args.field_degree)
    walk = selmersys.rank_walk(seed, args.target, rng_seed=args.seed)
    ok = all(abs(s.new_dim - s.old_dim) == 1 for s in walk.steps) and walk.final_dim == args.target
    out = {"seed_places": dims, "field_degree": args.field_degree, "seed": args.seed, **walk.to_dict(),
           "all_steps_unit": ok}
    if args.emit_system:
        out["system"] = walk.system.to_dict()
    return out, EXIT_OK if ok else EXIT_FAIL


def cmd_lift_check(args):
    rep = liftrig.rigidity_report(args.q, args.precision)
    if not args.witnesses:
        rep.pop("witnesses")
    if args.det_trick:
        d = liftrig.det_trick_check(args.q, args.precision)
        rep["unconstrained"] = {k: d[k] for k in ("solution_count", "all_diagonal", "det_order_le_2")}
        rep["unconstrained"]["distinct_determinants"] = len(d["determinants"])
    return rep, EXIT_OK if rep["all_in_mu2"] else EXIT_FAIL


def cmd_fetch(args):
    client = _client(args)
    out = {}
    if args.curve:
        E = client.fetch_curve(args.curve)
        out["curve"] = {"label": args.curve, "ainvs": list(E.ainvs), "conductor": E.conductor}
    if args.level:
        forms = client.fetch_newforms(args.level)
        out["level"] = args.level
        out["newforms"] = [{"label": g.label, "dim": g.dim, "field_poly": list(g.field_poly),
                            "signs": {str(p): lmfdb.sign_extract(g, p) for p in sorted(g.atkin_lehner)},
                            "traces": list(g.traces[: args.traces])} for g in forms]
        out["newspace_dim"] = sum(g.dim for g in forms)
    if not out:
        raise UsageError("fetch needs --level or --curve")
    return out, EXIT_OK


def cmd_audit(args):
    tables = lmfdb.load_tables(args.tables)
    rep = lmfdb.verify_table(tables, _client(args), bound=args.bound)
    if not args.certificates:
        rep["tables"]["level_raising_at_7"].pop("certificates", None)
    return rep, EXIT_OK if rep["ok"] else EXIT_FAIL


COMMANDS = {
    "analyze": cmd_analyze,
    "raising-primes": cmd_raising_primes,
    "aux-primes": cmd_aux_primes,
    "local": cmd_local,
    "qform": cmd_qform,
    "selmer-sim": cmd_selmer_sim,
    "lift-check": cmd_lift_check,
    "fetch": cmd_fetch,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--offline", action="store_true", help="serve data only from cache and fixtures")
    common.add_argument("--cache-dir", default=None)
    common.add_argument("--log-level", default="WARNING")

    p = _Parser(prog="lrlab", description="Mod-2 level raising and 2-Selmer rank toolkit.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_, curve=True):
        sp = sub.add_parser(name, help=help_, parents=[common])
        if curve:
            sp.add_argument("--curve", required=True, help='"a1,a2,a3,a4,a6" or a curve label such as 11a1')
        return sp

    sp = add("analyze", "invariants, mod-2 image, 2-adic profile and standing hypotheses")
    sp.add_argument("--precision", type=int, default=64)

    sp = add("raising-primes", "primes q not dividing 2N with a_q even")
    sp.add_argument("--bound", type=int, default=100)
    sp.add_argument("--density", action="store_true")

    sp = add("aux-primes", "auxiliary primes q0 = 3 mod 4 (the supersingular argument uses --min 8)")
    sp.add_argument("--sigma", default="", help="chosen level-raising primes, comma separated")
    sp.add_argument("--p1", type=int, required=True)
    sp.add_argument("--min", type=int, default=2,
                    help="smallest q0 to accept; the supersingular argument uses q0 > 7, i.e. --min 8")
    sp.add_argument("--bound", type=int, default=1000)
    sp.add_argument("--limit", type=int, default=50)
    sp.add_argument("--strict", action="store_true")

    sp = add("local", "classify the local Selmer condition at a place")
    sp.add_argument("--place", required=True, help="prime or inf")
    sp.add_argument("--context", choices=localcond.CONTEXTS)
    sp.add_argument("--sign", type=int, choices=(1, -1))

    sp = add("qform", "involution and isotropy certificate at an order-2 prime")
    sp.add_argument("--place", type=int, required=True)

    sp = add("selmer-sim", "rank walk on a finite Selmer model, or exhaustive lemma checks", curve=False)
    sp.add_argument("--places", default="2", help="dimensions of the seed places, comma separated")
    sp.add_argument("--target", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--field-degree", type=int, default=1)
    sp.add_argument("--exhaustive", type=int, help="check every system up to this even total dimension (<= 8)")
    sp.add_argument("--emit-system", action="store_true")

    sp = add("lift-check", "enumerate tame lifts over GR(2^k, 2)", curve=False)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--precision", type=int, required=True)
    sp.add_argument("--det-trick", action="store_true", help="also check unconstrained determinants")
    sp.add_argument("--witnesses", action="store_true")

    sp = add("fetch", "fetch curve or newform data (cached)", curve=False)
    sp.add_argument("--level", type=int)
    sp.add_argument("--curve")
    sp.add_argument("--traces", type=int, default=20)

    sp = add("audit", "re-derive the transcribed tables from newform data", curve=False)
    sp.add_argument("--tables", default=None, help="table transcription JSON (default: bundled)")
    sp.add_argument("--bound", type=int, default=None)
    sp.add_argument("--certificates", action="store_true")
    return p


# ------------------------------------------------------------------- output


def _scalar(v) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return str(v)


def render_table(report: dict) -> str:
    lines = []
    width = max((len(k) for k in report), default=0)
    for k, v in report.items():
        if isinstance(v, list) and v and all(isinstance(r, dict) for r in v):
            lines.append(f"{k}:")
            cols = list(dict.fromkeys(c for r in v for c in r))
            cells = [[_scalar(r.get(c, "")) for c in cols] for r in v]
            ws = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
            lines.append("  " + "  ".join(c.ljust(w) for c, w in zip(cols, ws)))
            for row in cells:
                lines.append("  " + "  ".join(x.ljust(w) for x, w in zip(row, ws)))
        elif isinstance(v, dict):
            lines.append(f"{k}:")
            sub = render_table(v).splitlines()
            lines.extend("  " + s for s in sub)
        else:
            lines.append(f"{k.ljust(width)}  {_scalar(v)}")
    return "\n".join(lines)


def emit(report: dict, fmt: str, stream=None):
    stream = stream or sys.stdout
    if fmt == "table":
        stream.write(render_table(report) + "\n")
    else:
        stream.write(json.dumps(report, sort_keys=True, indent=2) + "\n")


def run(argv=None, stream=None) -> int:
    parser = build_parser()
    stream = stream or sys.stdout
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lrlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        report, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"lrlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        emit({"command": args.command, "error": type(exc).__name__, "message": str(exc),
              "anchor": ANCHORS[args.command]}, args.format, stream)
        return EXIT_USAGE
    except LrlabError as exc:
        anchor = next((a for cls, a in ERROR_ANCHORS.items() if isinstance(exc, cls)), ANCHORS[args.command])
        out = {"command": args.command, "error": type(exc).__name__, "message": str(exc), "anchor": anchor}
        if getattr(exc, "report", None) is not None:
            out["report"] = exc.report
        emit(out, args.format, stream)
        return EXIT_FAIL
    report = {"command": args.command, "anchor": ANCHORS[args.command], **report}
    emit(report, args.format, stream)
    return code


def main():
    sys.exit(run())
