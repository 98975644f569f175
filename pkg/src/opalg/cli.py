"""Command line front end for the scenario runner."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .scenario import (ScenarioParseError, UnknownCheckError, available_checks,
                       emit_report, load_scenario, run_scenario)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opalg",
        description="Run verification scenarios for the operator-algebra toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="path to a scenario JSON file")
    run.add_argument("--format", choices=("text", "csv"), default="text")
    run.add_argument("--out", help="write the report to this path")
    run.add_argument("--jobs", type=int, default=1,
                     help="max concurrent independent checks")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")

    sub.add_parser("checks", help="list available check names")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.command == "checks":
        for name in available_checks():
            print(name)
        return EXIT_OK

    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioParseError, UnknownCheckError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    report = run_scenario(scenario, jobs=args.jobs, seed_override=args.seed)
    rendered = emit_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


if __name__ == "__main__":
    raise SystemExit(main())
