"""Command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 destructive change, 4 resource limit.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from .assembly import Limits, classify, parse_formula
from .engine import TRACE, EngineConfig, Status
from .environment import load_scenario, run_scenario
from .errors import EgoError, ResourceError
from .evaluator import (
    DEFAULT_PAIRING_LIMIT,
    equality_expression,
    intersection,
    lower,
    membership_expression,
    render_expr,
    subset_expression,
    union,
)
from .selfcheck import bounded_corpus, scenario_path, verify_examples, verify_lineage, verify_selfref

__all__ = ["main", "build_parser"]

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_DESTROYED, EXIT_RESOURCE = 0, 1, 2, 3, 4
_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG, "trace": TRACE}


def _configure_logging() -> None:
    raw = os.environ.get("EGO_LOG_LEVEL", "error").strip().lower()
    if raw not in _LEVELS:
        raise SystemExit(f"EGO_LOG_LEVEL must be one of {', '.join(_LEVELS)}")
    logging.addLevelName(TRACE, "TRACE")
    logging.basicConfig(level=_LEVELS[raw], format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="egokernel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write its trace")
    r.add_argument("--scenario", required=True, help="scenario file, or the name of a bundled scenario")
    r.add_argument("--trace", help="JSON-lines trace output path")
    r.add_argument("--budget", type=int, help="number of clocks (default: from the scenario)")
    r.add_argument("--seed", type=int, help="override the scenario seed")
    r.add_argument("--max-chain", type=int, help="longest manipulation chain (default: from the scenario)")

    v = sub.add_parser("verify", help="run a self-check suite")
    v.add_argument("--suite", required=True, choices=["selfref", "lineage", "examples"])
    v.add_argument("--max-depth", type=int, default=3, help="corpus depth bound (default 3)")
    v.add_argument("--max-width", type=int, default=4, help="corpus width bound (default 4)")
    v.add_argument("--max-formulas", type=int, default=5000, help="corpus size limit (default 5000)")

    e = sub.add_parser("eval", help="build and classify a relational evaluator")
    rel = e.add_mutually_exclusive_group(required=True)
    for flag in ("eq", "in", "subset", "cap", "cup"):
        rel.add_argument(f"--{flag}", dest="relation", action="store_const", const=flag)
    e.add_argument("left")
    e.add_argument("right")
    e.add_argument("--show-expansion", action="store_true", help="also print the primitive brace form")
    e.add_argument("--max-depth", type=int, default=64)
    e.add_argument("--max-width", type=int, default=1024)
    e.add_argument("--max-pairings", type=int, default=DEFAULT_PAIRING_LIMIT)
    return p


def _resolve_scenario(ref: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    bundled = scenario_path(ref)
    if bundled.is_file():
        return Path(str(bundled))
    return path


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(_resolve_scenario(args.scenario))
    max_chain = scenario.max_chain if args.max_chain is None else args.max_chain
    cfg = EngineConfig(max_chain=max_chain, labels=scenario.labels())
    report = run_scenario(scenario, budget=args.budget, seed=args.seed, trace_path=args.trace, config=cfg)
    print(report.to_text())
    return EXIT_DESTROYED if report.status is Status.DESTROYED else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.suite == "examples":
        results = verify_examples()
    else:
        corpus = bounded_corpus(args.max_depth, args.max_width, args.max_formulas)
        results = [verify_selfref(corpus) if args.suite == "selfref" else verify_lineage(corpus)]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_eval(args: argparse.Namespace) -> int:
    limits = Limits(args.max_depth, args.max_width)
    x, y = parse_formula(args.left, limits), parse_formula(args.right, limits)
    k = args.max_pairings
    if args.relation in ("cap", "cup"):
        res = (intersection if args.relation == "cap" else union)(x, y, verify=True, limit=k)
        print(f"result: {res.value.render}")
        if res.disjoint:
            print("disjoint: the arguments share no member")
            return EXIT_OK
        print(f"verification: {classify(res.verification).value}")
        if args.show_expansion:
            print(f"primitive: {res.verification.render}")
        return EXIT_OK
    build = {"eq": equality_expression, "in": membership_expression, "subset": subset_expression}[args.relation]
    expr = build(x, y, k)
    form = lower(expr)
    print(f"evaluator: {render_expr(expr)}")
    if args.show_expansion:
        print(f"primitive: {form.render}")
    print(f"class: {classify(form).value}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        _configure_logging()
    except SystemExit as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    handler = {"run": cmd_run, "verify": cmd_verify, "eval": cmd_eval}[args.command]
    try:
        return handler(args)
    except ResourceError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (EgoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
