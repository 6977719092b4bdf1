"""Command-line front end.

Exit codes: 0 success, 1 failed checks (suite failures, inconsistent probe
tables), 2 usage, parse or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import harness, plotting
from .constructions import StitchParams, chord_approximation, stitch, stitch_value_identity
from .convergence import FunctionSequence, sequence_report, tau_convergence_check
from .errors import (
    GeneratorStarved,
    InconsistentC0,
    MDependent,
    MissingProbe,
    NotAdditive,
    PLQValError,
)
from .functionals import (
    BUILTIN_SPECS,
    ProbeTableValuation,
    ValuationSpec,
    classify,
    make_probe_table,
)
from .plq import load
from .zeta import parse_zeta

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SUITES = ("valuation", "invariance", "usc", "roundtrip", "all")


class UsageError(Exception):
    pass


def _num(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _spec(args) -> ValuationSpec:
    try:
        zeta = parse_zeta(args.zeta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return ValuationSpec(args.c0, args.c1, zeta)


def _parse_builtin(text: str) -> ValuationSpec:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"--builtin expects C0,C1,ZETA, got {text!r}")
    try:
        return ValuationSpec(float(parts[0]), float(parts[1]), parse_zeta(parts[2]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands -------------------------------------------------------------------

def cmd_eval(args) -> int:
    u = load(args.function)
    rows = [(x, u.eval(x)) for x in args.x]
    if args.format == "csv":
        _emit(args, _rows_csv(["x", "value"], [(repr(x), repr(v)) for x, v in rows]))
    else:
        _emit(args, _dumps([{"x": x, "value": _num(v)} for x, v in rows]))
    return EXIT_OK


def cmd_functional(args) -> int:
    u = load(args.function)
    spec = _spec(args)
    s0, s1, s2 = spec.breakdown(u)
    total = s0 + s1 + s2
    if args.format == "csv":
        _emit(args, _rows_csv(["total", "c0_term", "c1_term", "zeta_term"],
                              [[repr(total), repr(s0), repr(s1), repr(s2)]]))
    else:
        _emit(args, _dumps({"spec": spec.label, "total": total,
                            "breakdown": {"c0_term": s0, "c1_term": s1, "zeta_term": s2}}))
    return EXIT_OK


def cmd_stitch(args) -> int:
    params = StitchParams(args.r, args.a, args.s, args.m, args.n)
    zeta = parse_zeta(args.zeta)
    res = stitch(params)
    if args.format == "svg":
        _emit(args, plotting.plot_stitch(res))
        return EXIT_OK
    if args.format == "csv":
        rows = [[i + 1, repr(x), repr(y), repr(b), repr(g)]
                for i, (x, y, b, g) in enumerate(zip(res.xs, res.ys, res.betas, res.gammas))]
        _emit(args, _rows_csv(["i", "x_i", "y_i", "beta_i", "gamma_i"], rows))
        return EXIT_OK
    z, predicted = stitch_value_identity(params, zeta)
    report = {
        "params": {"r": params.r, "a": params.a, "s": params.s, "m": params.m, "n": params.n},
        "zeta": zeta.label,
        "lambda": params.lam,
        "z_vn": z,
        "predicted": predicted,
        "identity_residual": abs(z - predicted),
        "concavity_witness": 2 * params.m * zeta(2 * params.a),
        "tangency_residual": res.tangency_residuals(),
        "function": res.v.to_dict(),
    }
    _emit(args, _dumps(report))
    return EXIT_OK


def _preset(args):
    name, _, path = args.preset.partition(":")
    kmax = args.kmax
    if name == "counterexample":
        if path:
            raise UsageError("the counterexample preset takes no target")
        return harness.counterexample_sequence(kmax)
    if name not in ("chord", "shrink") or not path:
        raise UsageError(f"unknown preset {args.preset!r}; use counterexample, "
                         "chord:TARGET.json or shrink:TARGET.json")
    u = load(path)
    if u.is_point:
        raise UsageError("the target must have a non-degenerate domain")
    if name == "chord":
        return FunctionSequence(lambda k: chord_approximation(u, k), kmax, f"chord:{path}"), u
    lo, hi = u.domain
    step = 0.25 * (hi - lo)
    return FunctionSequence(lambda k: u.restrict(lo + step / k, hi - step / k), kmax,
                            f"shrink:{path}"), u


def cmd_sequence(args) -> int:
    seq, limit = _preset(args)
    spec = _spec(args)
    rep = sequence_report(seq, limit, spec)
    if args.format == "csv":
        _emit(args, rep.to_csv())
    elif args.format == "svg":
        _emit(args, plotting.plot_sequence(rep))
    else:
        tau = tau_convergence_check(seq, limit)
        _emit(args, _dumps({"name": rep.name, "spec": spec.label, "tau": tau.to_dict(),
                            "limit_value": spec(limit),
                            "limit_v1": limit.domain.length,
                            "records": [{"k": r.k, "L_k": r.lipschitz, "sup_gap": _num(r.sup_gap),
                                         "d_H": r.hausdorff, "V1": r.v1, "Z": r.value}
                                        for r in rep.records]}))
    return EXIT_OK


def cmd_classify(args) -> int:
    if (args.table is None) == (args.builtin is None):
        raise UsageError("give exactly one of a probe table path or --builtin C0,C1,ZETA")
    if args.builtin is not None:
        table = make_probe_table(_parse_builtin(args.builtin))
    else:
        try:
            table = json.loads(Path(args.table).read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{args.table}: invalid JSON ({exc})") from None
    if args.emit_table:
        _emit(args, _dumps(table))
        return EXIT_OK
    Z = ProbeTableValuation(table)
    missing = Z.missing()
    if missing:
        raise MissingProbe(missing)
    try:
        rep = classify(Z, Z.a_grid, Z.m)
    except (InconsistentC0, NotAdditive, MDependent) as exc:
        _emit(args, _dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_FAIL
    if args.format == "csv":
        _emit(args, rep.to_csv())
    elif args.format == "svg":
        _emit(args, plotting.plot_zeta(rep))
    else:
        _emit(args, rep.to_json())
    return EXIT_OK


def _suite_valuations(args):
    if args.stub:
        return [harness.STUBS[args.stub]]
    return list(BUILTIN_SPECS)


def cmd_suite(args) -> int:
    names = ("valuation", "invariance", "usc", "roundtrip") if args.suite == "all" else (args.suite,)
    try:
        cfg = harness.PairGeneratorConfig(seed=args.seed, count=args.count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    results = []
    Zs = _suite_valuations(args)
    if "valuation" in names:
        pairs = harness.generate_valid_pairs(cfg)
        results += [harness.run_valuation_suite(Z, pairs=pairs, tol=args.tol or harness.VALUATION_TOL)
                    for Z in Zs]
    if "invariance" in names:
        results += [harness.run_invariance_suite(Z, cfg, tol=args.tol or harness.INVARIANCE_TOL)
                    for Z in Zs]
    if "usc" in names:
        corpus = harness.tau_corpus() + [harness.counterexample_sequence()]
        results += [harness.run_usc_suite(Z, corpus, tol=args.tol or 1e-6) for Z in Zs]
    if "roundtrip" in names and not args.stub:
        results.append(harness.run_roundtrip_suite())
    passed = all(r.passed for r in results)
    if args.format == "csv":
        _emit(args, _rows_csv(["suite", "cases", "failures", "max_residual"],
                              [[r.name, r.cases, r.n_failures, repr(r.max_residual)] for r in results]))
    else:
        _emit(args, _dumps({"seed": args.seed, "passed": passed,
                            "results": [r.to_dict() for r in results]}))
    return EXIT_OK if passed else EXIT_FAIL


# -- parser ------------------------------------------------------------------------------

def _positive(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=_positive, default=None,
                        help="override the suite tolerance")

    spec = argparse.ArgumentParser(add_help=False)
    spec.add_argument("--c0", type=float, default=0.0)
    spec.add_argument("--c1", type=float, default=0.0)
    spec.add_argument("--zeta", default="power13",
                      help="power13, power23, power12, log1p, mincap1, power:P or min_cap:C")

    parser = argparse.ArgumentParser(
        prog="plqval", description="Valuations on piecewise linear-quadratic convex functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate a function at points")
    p.add_argument("function", help="function JSON file")
    p.add_argument("x", type=float, nargs="+")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("functional", parents=[common, spec], help="Z(u) with its three summands")
    p.add_argument("function")
    p.set_defaults(func=cmd_functional)

    p = sub.add_parser("stitch", parents=[common], help="tangent-chain approximant")
    for name, default in (("r", 0.0), ("a", 1.0), ("s", 2.0), ("m", 1.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--zeta", default="power13")
    p.set_defaults(func=cmd_stitch)

    p = sub.add_parser("sequence", parents=[common, spec], help="tabulate a function sequence")
    p.add_argument("--preset", required=True,
                   help="counterexample, chord:TARGET.json or shrink:TARGET.json")
    p.add_argument("--kmax", type=int, default=16)
    p.set_defaults(func=cmd_sequence)

    p = sub.add_parser("classify", parents=[common], help="recover (c0, c1, zeta) from probes")
    p.add_argument("table", nargs="?", help="probe-table JSON")
    p.add_argument("--builtin", help="classify C0,C1,ZETA via its own probe table")
    p.add_argument("--emit-table", action="store_true", help="print the probe table and stop")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("suite", parents=[common], help="run property suites")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--count", type=int, default=1200, help="pairs or cases per suite")
    p.add_argument("--stub", choices=sorted(harness.STUBS),
                   help="run a deliberately broken valuation instead of the built-ins")
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "kmax", 1) < 1:
        parser.error("--kmax must be positive")
    try:
        return args.func(args)
    except MissingProbe as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GeneratorStarved as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, PLQValError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
