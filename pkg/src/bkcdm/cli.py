"""Command-line interface.

Exit codes: 0 pass, 1 property failure, 2 input error, 3 precision or
budget exhaustion.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from itertools import product

from . import __version__
from .bkmod import BKModule, NotHodgeV0, NotRegular, Workspace
from .cdm import NoConvergence, cdm_reduce, default_budget, is_bad_genre, verify_reduction
from .coeffring import CoeffRing, NonDivisible, NotInvertible, PrecisionExhausted
from .quotient import GroupElement, XPoint, check_etale_base_change, functor_T, g_action
from .straighten import assemble_F, presentation_identity, straighten, straighten_budget
from .suites import SUITES, run_suites
from .tametype import (
    OutOfRange,
    SerreWeight,
    ShapeNotAdmissible,
    TameType,
    eligible_weight,
    first_obstruction,
    gamma_from_z,
    max_refined_shape,
    p_tau_contains,
    second_obstruction,
    tau_from_weight,
    tilde_z,
    unobstructed,
    weight_from_shape,
)

EXIT_PASS, EXIT_FAIL, EXIT_INPUT, EXIT_EXHAUSTED = 0, 1, 2, 3

MAX_P, MAX_F = 13, 6


class BoundsExceeded(ValueError):
    pass


def _int_list(s: str) -> list[int]:
    s = s.strip()
    if not s:
        return []
    return [int(t) for t in s.replace(";", ",").split(",")]


def _emit(obj, out: str | None, fmt: str = "json"):
    if fmt == "json":
        text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    else:
        text = obj
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str):
    with open(path) as fh:
        return json.load(fh)


def _tau(args) -> TameType:
    if args.p is None or args.z is None:
        raise OutOfRange("--p and --z are required")
    z = _int_list(args.z)
    f = args.f if args.f is not None else len(z)
    return TameType(args.p, f, tuple(z))


def _ring(args, p: int) -> CoeffRing:
    return CoeffRing(p, args.m, args.k)


def _workspace_from(obj, args) -> Workspace:
    tau = TameType.from_json(obj["tau"])
    r = obj.get("ring", {})
    ring = CoeffRing(tau.p, int(r.get("m", 1)), int(r.get("k", 1)))
    return Workspace(tau, ring, args.prec or obj.get("prec_u"))


def _config(args, ws: Workspace | None = None, **extra) -> dict:
    out = {"command": args.command, "version": __version__}
    if ws is not None:
        out.update(ws.metadata())
    out.update({k: v for k, v in extra.items() if v is not None})
    return out


# --- commands ---------------------------------------------------------------


def cmd_reduce(args) -> int:
    M = BKModule.from_json(_load(args.input), args.prec)
    ws = M.ws
    budget = args.max_sweeps or default_budget(ws)
    report = {"config": _config(args, ws, budget_steps=budget)}
    report["bad_genre"] = is_bad_genre(M)
    try:
        res = cdm_reduce(M, budget)
    except NoConvergence as exc:
        report.update({"converged": False, "t_trace": exc.trace, "error": str(exc)})
        _emit(report, args.out)
        return EXIT_EXHAUSTED
    ok = verify_reduction(M, res)
    report.update(res.to_json())
    report.update({"converged": True, "verified": ok, "cdm_matrices": [C.to_json() for C in res.cdm_mats]})
    _emit(report, args.out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_straighten(args) -> int:
    obj = _load(args.input)
    ws = _workspace_from(obj, args)
    ring = ws.ring
    g = GroupElement.from_json(ring, obj["g"])
    x = XPoint.from_json(ring, obj["x"])
    budget = args.max_sweeps or straighten_budget(ws)
    report = {"config": _config(args, ws, budget_iterations=budget),
              "second_obstruction": second_obstruction(ws.p, ws.tau.z)}
    G = functor_T(ws, x).restricted()
    try:
        data = straighten(ws, g.y, G, budget)
        J = assemble_F(ws, g, x, budget)
    except NoConvergence as exc:
        report.update({"converged": False, "difference_valuations": exc.trace, "error": str(exc)})
        _emit(report, args.out)
        return EXIT_EXHAUSTED
    ok = presentation_identity(ws, g, x, J)
    etale = check_etale_base_change(ws, G, functor_T(ws, g_action(g, x)).restricted(), J)
    report.update({
        "converged": True,
        "straightening": data.to_json(),
        "J": [Ji.to_json() for Ji in J],
        "identity_holds": ok,
        "etale_check": etale,
    })
    _emit(report, args.out)
    return EXIT_PASS if ok and etale["passed"] else EXIT_FAIL


def type_report(tau: TameType, T=None) -> dict:
    f, p = tau.f, tau.p
    full = tuple(range(f))
    rep = {
        "tau": tau.to_json(),
        "gamma": list(tau.gamma),
        "e": tau.e,
        "eta_equals_eta_prime": tau.eta_equals_eta_prime,
        "first_obstruction": first_obstruction(p, tau.z),
        "second_obstruction": second_obstruction(p, tau.z),
        "unobstructed": unobstructed(tau),
        "P_tau": {
            "full": p_tau_contains(tau, full),
            "empty": p_tau_contains(tau, ()),
        },
        "max_refined_shape": {"full": list(max_refined_shape(tau, full)), "empty": list(max_refined_shape(tau, ()))},
    }
    if T is not None:
        rep["T"] = sorted(T)
        rep["tilde_z"] = list(tilde_z(p, f, tau.z, T))
        rep["first_obstruction_T"] = first_obstruction(p, tau.z, T)
        rep["second_obstruction_T"] = second_obstruction(p, tau.z, T)
        rep["T_in_P_tau"] = p_tau_contains(tau, T)
    try:
        w = weight_from_shape(tau, full)
        ok, why = eligible_weight(w)
        rep["weight"] = w.to_json()
        rep["weight"]["twist_convention_dependent"] = True
        rep["eligible"] = ok
        rep["diagnosis"] = why
    except ShapeNotAdmissible as exc:
        rep["weight"] = None
        rep["diagnosis"] = str(exc)
    return rep


def cmd_check_type(args) -> int:
    if args.weight:
        b = _int_list(args.weight)
        a = _int_list(args.a) if args.a else [0] * len(b)
        sigma = SerreWeight(args.p, tuple(a), tuple(b), args.twist)
        tau = tau_from_weight(sigma)
    else:
        tau = _tau(args)
    T = set(_int_list(args.T)) if args.T is not None else None
    rep = type_report(tau, T)
    rep["config"] = _config(args)
    _emit(rep, args.out)
    return EXIT_PASS


def enumerate_weights(p: int, f: int, twists: bool = False) -> list[dict]:
    rows = []
    for b in product(range(p), repeat=f):
        avecs = product(range(p), repeat=f) if twists else [(0,) * f]
        for a in avecs:
            if all(x == p - 1 for x in a):
                continue
            sigma = SerreWeight(p, a, b)
            ok, why = eligible_weight(sigma)
            row = {"a": list(a), "b": list(b), "eligible": ok, "diagnosis": why}
            if ok:
                tau = tau_from_weight(sigma)
                row["z"] = list(tau.z)
                row["eta_prime_exp"] = tau.eta_prime_exp
            rows.append(row)
    return rows


def cmd_enumerate_weights(args) -> int:
    if args.p > MAX_P or args.f > MAX_F:
        raise BoundsExceeded(f"bounds are p <= {MAX_P}, f <= {MAX_F}")
    gamma_from_z(args.p, args.f, [0] * args.f)  # validates p
    rows = enumerate_weights(args.p, args.f, args.twists)
    non_st = [r for r in rows if r["diagnosis"] != "steinberg"]
    summary = {"eligible": sum(r["eligible"] for r in rows), "non_steinberg": len(non_st), "total": len(rows)}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "b", "eligible", "diagnosis"])
        for r in rows:
            w.writerow([",".join(map(str, r["a"])), ",".join(map(str, r["b"])), r["eligible"], r["diagnosis"]])
        w.writerow(["#eligible", summary["eligible"], "#non_steinberg", summary["non_steinberg"]])
        _emit(buf.getvalue(), args.out, "csv")
    else:
        _emit({"config": _config(args, p=args.p, f=args.f), "rows": rows, "summary": summary}, args.out)
    return EXIT_PASS


def cmd_verify(args) -> int:
    if args.z is None:
        args.p = args.p or 3
        args.z = "1,2"
    tau = _tau(args)
    ws = Workspace(tau, _ring(args, tau.p), args.prec)
    names = SUITES if args.suite == "all" else (args.suite,)
    result = run_suites(names, ws, args.samples, args.seed)
    result["config"] = _config(args, ws, seed=args.seed, samples=args.samples, suite=args.suite)
    _emit(result, args.out)
    return EXIT_PASS if result["passed"] else EXIT_FAIL


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bkcdm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, typ=True):
        if typ:
            sp.add_argument("--p", type=int)
            sp.add_argument("--f", type=int)
            sp.add_argument("--z", type=str, help="comma-separated digits")
        sp.add_argument("--m", type=int, default=1, help="residue field degree")
        sp.add_argument("--k", type=int, default=1, help="nilpotency order of eps")
        sp.add_argument("--prec", type=int, help="working u-precision N_u")
        sp.add_argument("--out", type=str)

    sp = sub.add_parser("reduce", help="reduce a module to CDM form")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--max-sweeps", type=int, help="budget in single-index steps")
    common(sp, typ=False)
    sp.set_defaults(run=cmd_reduce)

    sp = sub.add_parser("straighten", help="assemble base changes for a group element")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--max-sweeps", type=int, help="iteration budget")
    common(sp, typ=False)
    sp.set_defaults(run=cmd_straighten)

    sp = sub.add_parser("check-type", help="obstructions and weight of a type")
    common(sp)
    sp.add_argument("--T", type=str, help="eta-form indices, comma-separated")
    sp.add_argument("--weight", type=str, help="b-vector; the type is derived from it")
    sp.add_argument("--a", type=str)
    sp.add_argument("--twist", type=int, default=0)
    sp.set_defaults(run=cmd_check_type)

    sp = sub.add_parser("enumerate-weights", help="eligibility table over all b-vectors")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--f", type=int, required=True)
    sp.add_argument("--twists", action="store_true", help="also enumerate a-vectors")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("--out", type=str)
    sp.set_defaults(run=cmd_enumerate_weights)

    sp = sub.add_parser("verify", help="run randomised property suites")
    sp.add_argument("--suite", choices=SUITES + ("all",), default="all")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(run=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except (PrecisionExhausted, NonDivisible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (OutOfRange, ShapeNotAdmissible, BoundsExceeded, NotHodgeV0, NotRegular, NotInvertible,
            ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
