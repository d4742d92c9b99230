"""Command-line entry point.

Three commands:

* ``run``     — simulate a scenario, writing a JSON Lines trace and a
                JSON report next to the input (or to explicit paths).
                Exit 0 on quiescence, 3 on hitting the tick limit.
* ``verify``  — recompute learning and replay from a trace with the
                brute-force oracle and compare. Exit 0 on agreement,
                4 on the first divergence (reported on stderr).
* ``check``   — parse and validate only; echo the canonical form.

Exit 1 is a parse/validation problem (the message names the line),
exit 2 an I/O problem. Diagnostics go to stderr; stdout stays silent
except for ``check``'s canonical echo.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from memfabric.engine import run_scenario
from memfabric.oracle import verify_run
from memfabric.scenario import (
    ScenarioError,
    canonical_scenario,
    parse_scenario,
    write_report,
)
from memfabric.trace import MalformedTraceError, parse_trace, write_trace

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2
EXIT_TICK_LIMIT = 3
EXIT_DIVERGENCE = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memfabric",
        description="Deterministic simulator of a sequence-learning memory fabric.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write trace + report")
    run.add_argument("scenario", help="scenario file")
    run.add_argument("--trace", help="trace output path (default: <scenario>.trace.jsonl)")
    run.add_argument("--report", help="report output path (default: <scenario>.report.json)")
    run.add_argument(
        "--max-ticks", type=int, help="override the scenario's maxticks directive"
    )
    run.add_argument(
        "--no-loop-suppression",
        action="store_true",
        help=argparse.SUPPRESS,  # test hook: let learned cycles run unboundedly
    )
    run.set_defaults(func=_cmd_run)

    verify = sub.add_parser("verify", help="cross-check a trace with the oracle")
    verify.add_argument("scenario", help="scenario file")
    verify.add_argument("trace", help="trace file produced by run")
    verify.set_defaults(func=_cmd_verify)

    check = sub.add_parser("check", help="parse and validate; echo the canonical form")
    check.add_argument("scenario", help="scenario file")
    check.set_defaults(func=_cmd_check)

    return parser


def _load_scenario(path: str):
    scenario = parse_scenario(Path(path).read_text(encoding="utf-8"))
    for warning in scenario.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return scenario


def _cmd_run(args: argparse.Namespace) -> int:
    if args.max_ticks is not None and args.max_ticks < 1:
        print("error: --max-ticks must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    scenario = _load_scenario(args.scenario)
    result = run_scenario(
        scenario,
        max_tick=args.max_ticks,
        loop_suppression=not args.no_loop_suppression,
    )
    trace_path = Path(args.trace) if args.trace else Path(args.scenario + ".trace.jsonl")
    report_path = Path(args.report) if args.report else Path(args.scenario + ".report.json")
    write_trace(result.records, trace_path)
    write_report(result.report, report_path)
    if not result.outcome.quiescent:
        print(
            f"tick limit reached at t={result.outcome.final_tick}; "
            f"{len(result.simulation.queue)} event(s) still pending",
            file=sys.stderr,
        )
        return EXIT_TICK_LIMIT
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.scenario)
    records = parse_trace(Path(args.trace).read_text(encoding="utf-8"))
    problems = verify_run(scenario, records)
    if problems:
        print(f"divergence: {problems[0]}", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    scenario = _load_scenario(args.scenario)
    sys.stdout.write(canonical_scenario(scenario))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except MalformedTraceError as exc:
        print(f"error: malformed trace: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
