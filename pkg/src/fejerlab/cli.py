"""Command-line front end.

Subcommands: solve, analyze, example, operator-test. Exit codes: 0 ok,
2 argument or input-file parse error, 3 solver stopped on budget (the
partial trace is still written), 4 diagnostics precondition failure.

The FEJERLAB_TOL environment variable overrides the default relative
tolerance of analyze and operator-test.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

import numpy as np

from . import diagnostics, gallery, geometry, operators, solvers
from .errors import FejerlabError
from .geometry import ConvexFnOracle

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_DIAGNOSTICS = 4


def _default_tol() -> float:
    return float(os.environ.get("FEJERLAB_TOL", "1e-9"))


def _parse_failure(message: str) -> SystemExit:
    print(message, file=sys.stderr)
    return SystemExit(EXIT_PARSE)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise _parse_failure(
            f"error: malformed JSON in {path} at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise _parse_failure(f"error: cannot read {path}: {exc}") from exc


def _dump_json(doc: dict, path: Optional[str]) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _oracle_from_spec(doc: dict) -> ConvexFnOracle:
    family = doc.get("family")
    if family == "ball":
        center = np.asarray(doc["center"], dtype=float)
        radius = float(doc["radius"])
        return ConvexFnOracle(
            value=lambda y, c=center, r=radius: float((y - c) @ (y - c)) - r * r,
            subgradient=lambda y, c=center: 2.0 * (y - c),
        )
    if family == "affine":
        normal = np.asarray(doc["normal"], dtype=float)
        offset = float(doc.get("offset", 0.0))
        return ConvexFnOracle(
            value=lambda y, a=normal, b=offset: float(a @ y) - b,
            subgradient=lambda y, a=normal: a.copy(),
        )
    raise _parse_failure(f"error: unknown oracle family {family!r} (expected 'ball' or 'affine')")


def _parse_schedule(text: str) -> solvers.EpsilonSchedule:
    parts = text.split(":")
    try:
        if parts[0] == "harmonic" and len(parts) == 2:
            return solvers.Harmonic(scale=float(parts[1]))
        if parts[0] == "geometric" and len(parts) == 3:
            return solvers.Geometric(base=float(parts[1]), ratio=float(parts[2]))
        if parts[0] == "constant" and len(parts) == 2:
            return solvers.Constant(value_=float(parts[1]))
    except ValueError as exc:
        raise _parse_failure(f"error: bad schedule {text!r}: {exc}") from exc
    raise _parse_failure(
        f"error: bad schedule {text!r} (expected harmonic:S, geometric:B:R or constant:V)"
    )


def _parse_point(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError as exc:
        raise _parse_failure(f"error: bad point {text!r}: {exc}") from exc


def _write_trace(trace: solvers.Trace, path: str, fmt: str) -> None:
    if fmt == "csv":
        solvers.save_trace_csv(trace, path)
    else:
        solvers.save_trace_json(trace, path)


def _cmd_solve(args: argparse.Namespace) -> int:
    problem = _load_json(args.problem)
    x0 = _parse_point(args.x0) if args.x0 else np.asarray(problem.get("x0"), dtype=float)
    if x0 is None or x0.ndim != 1:
        raise _parse_failure("error: no starting point (use --x0 or an 'x0' entry in the problem)")
    stop = solvers.StopRule(
        max_iters=args.max_iters,
        residual_tol=args.residual_tol,
        feasibility_tol=args.feasibility_tol,
    )
    if args.method in ("simultaneous", "sequential"):
        sets = [geometry.set_from_json(doc) for doc in problem.get("sets", [])]
        if not sets:
            raise _parse_failure("error: the problem file has no 'sets' entry")
        if args.method == "simultaneous":
            weights = problem.get("weights") or [1.0 / len(sets)] * len(sets)
            trace = solvers.simultaneous_projections(sets, weights, x0, stop)
        else:
            trace = solvers.sequential_projections(sets, x0, stop)
    else:
        oracle_docs = problem.get("oracles", [])
        if not oracle_docs:
            raise _parse_failure("error: the problem file has no 'oracles' entry")
        fns = [_oracle_from_spec(doc) for doc in oracle_docs]
        trace = solvers.inner_approx_separating(
            fns,
            x0,
            schedule=_parse_schedule(args.schedule),
            control=args.control.replace("-", "_"),
            stop=stop,
        )
    _write_trace(trace, args.out, args.format)
    return EXIT_BUDGET if trace.status == "Budget" else EXIT_OK


def _cmd_analyze(args: argparse.Namespace) -> int:
    if args.trace.endswith(".csv"):
        trace = solvers.load_trace_csv(args.trace)
    else:
        doc = _load_json(args.trace)
        trace = solvers.trace_from_json(doc)
    anchors = diagnostics.anchorset_from_json(_load_json(args.anchors))
    try:
        report = diagnostics.analyze_trace(trace, anchors, tol=args.tol)
        doc = diagnostics.report_to_json(report)
        if args.clusters:
            cluster = diagnostics.cluster_points(
                trace, tail_fraction=args.tail_fraction, radius=args.radius
            )
            doc["clusters"] = diagnostics.cluster_report_to_json(cluster)
    except (FejerlabError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS
    _dump_json(doc, args.report)
    return EXIT_OK


def _cmd_example(args: argparse.Namespace) -> int:
    if args.name == "3.3":
        fixture = gallery.example_3_3(args.iters, args.anchor_points, seed=args.seed)
    elif args.name == "remark":
        fixture = gallery.example_remark_interior(args.iters, grid=args.grid)
    elif args.name == "quasi2":
        fixture = gallery.example_quasi2_not_star(args.iters)
    else:  # pragma: no cover - argparse choices guard this
        raise _parse_failure(f"error: unknown example {args.name!r}")
    if args.format == "csv":
        solvers.save_trace_csv(fixture.trace, args.out)
        return EXIT_OK
    doc = solvers.trace_to_json(fixture.trace)
    doc["anchor_sets"] = {
        name: diagnostics.anchorset_to_json(a) for name, a in fixture.anchor_sets.items()
    }
    doc["analytic_facts"] = {
        name: {
            "value": fact.value.tolist() if isinstance(fact.value, np.ndarray) else fact.value,
            "provenance": fact.provenance,
        }
        for name, fact in fixture.analytic_facts.items()
    }
    doc["expectations"] = dict(fixture.expectations)
    _dump_json(doc, args.out)
    return EXIT_OK


_PROPERTY_NAMES = {
    "contraction": operators.OperatorProperty.CONTRACTION,
    "nonexpansive": operators.OperatorProperty.NONEXPANSIVE,
    "firmly-nonexpansive": operators.OperatorProperty.FIRMLY_NONEXPANSIVE,
    "nonexpansive-plus": operators.OperatorProperty.NONEXPANSIVE_PLUS,
}


def _cmd_operator_test(args: argparse.Namespace) -> int:
    op = operators.operator_from_json(_load_json(args.operator))
    dim = op.dim
    if dim is None:
        raise _parse_failure("error: the operator has no determinable ambient dimension")
    rng = np.random.default_rng(args.seed)
    pairs = [
        (rng.uniform(args.low, args.high, dim), rng.uniform(args.low, args.high, dim))
        for _ in range(args.pairs)
    ]
    report = operators.check_property(op, _PROPERTY_NAMES[args.property], pairs, tol=args.tol)
    _dump_json(
        {
            "property": report.property.value,
            "samples": report.samples,
            "worst_slack": report.worst_slack,
            "estimated_tau": report.estimated_tau,
            "num_violations": len(report.violations),
            "passed": report.passed,
        },
        args.out,
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fejerlab",
        description="Convex feasibility solvers and iterate-trace monotonicity diagnostics.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("solve", help="run a solver on a problem file and write the trace")
    p.add_argument("--method", required=True, choices=["simultaneous", "sequential", "inner-approx"])
    p.add_argument("--problem", required=True, help="problem JSON file")
    p.add_argument("--x0", help="starting point, comma separated (overrides the problem file)")
    p.add_argument("--schedule", default="harmonic:1", help="harmonic:S | geometric:B:R")
    p.add_argument("--control", default="most-violated", choices=["cyclic", "most-violated"])
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--residual-tol", type=float, default=1e-12)
    p.add_argument("--feasibility-tol", type=float, default=1e-9)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("analyze", help="classify a trace against an anchor set")
    p.add_argument("--trace", required=True)
    p.add_argument("--anchors", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--tol", type=float, default=_default_tol())
    p.add_argument("--clusters", action="store_true", help="also emit a cluster report")
    p.add_argument("--tail-fraction", type=float, default=0.25)
    p.add_argument("--radius", type=float, default=1e-3)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("example", help="write a named gallery fixture")
    p.add_argument("--name", required=True, choices=sorted(gallery.FIXTURES))
    p.add_argument("--iters", type=int, default=200)
    p.add_argument("--anchor-points", type=int, default=6)
    p.add_argument("--grid", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=_cmd_example)

    p = sub.add_parser("operator-test", help="sampled operator-property check")
    p.add_argument("--operator", required=True, help="operator JSON file")
    p.add_argument("--property", required=True, choices=sorted(_PROPERTY_NAMES))
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--low", type=float, default=-3.0)
    p.add_argument("--high", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=_default_tol())
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_operator_test)

    return parser


def run(argv: List[str]) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def main() -> None:  # pragma: no cover - console entry point
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":  # pragma: no cover
    main()
