"""Command-line entry point.

Exit codes: 0 success, 2 invariant violation, 1 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..errors import SwarmkinError, InvalidSpec
from ..measures import DiscreteMeasure
from ..transport import w1_exact
from .runner import run_scenario, summary_line, write_report
from .scenario import Scenario, list_scenarios

SCHEMA_HINT = ("scenario files are JSON objects with keys model, initial, dt, t_end, record_every, experiment; "
               "see README.md (Scenario files) or the shipped examples: " + ", ".join(list_scenarios()))

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="swarmkin", description="Kinetic swarming experiments")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, kind in [("simulate", "simulate"), ("stability", "stability"), ("meanfield", "meanfield"),
                       ("flocking", "flocking"), ("hydro-compare", "hydro_comparison")]:
        s = sub.add_parser(name, help=f"run the {kind} experiment of a scenario")
        s.add_argument("--scenario", required=True, help="scenario JSON path or shipped scenario name")
        s.add_argument("--out", default="out", help="output directory (default: out)")
        s.set_defaults(kind=kind)
    w = sub.add_parser("w1", help="exact W1 between two measure JSON files")
    w.add_argument("--a", required=True)
    w.add_argument("--b", required=True)
    w.add_argument("--metric", choices=["phase", "position"], default="phase")
    w.add_argument("--plan", help="optional path to write the optimal plan JSON")
    sub.add_parser("selftest", help="run the fast closed-form checks")
    sub.add_parser("scenarios", help="list shipped scenarios")
    return p


def _load_measure(path: str) -> DiscreteMeasure:
    try:
        return DiscreteMeasure.from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise UsageError(f"cannot read measure {path}: {exc}") from exc


def cli_main(argv=None, out=sys.stdout, err=sys.stderr) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parser().parse_args(argv)
    except UsageError as exc:
        print(f"swarmkin: error: {exc}\n{SCHEMA_HINT}", file=err)
        return EXIT_USAGE
    try:
        if args.command == "selftest":
            from .selftest import run_selftest

            return EXIT_OK if run_selftest(lambda s: print(s, file=out)) else EXIT_VIOLATION
        if args.command == "scenarios":
            print("\n".join(list_scenarios()), file=out)
            return EXIT_OK
        if args.command == "w1":
            f, g = _load_measure(args.a), _load_measure(args.b)
            d, plan = w1_exact(f, g, metric=args.metric)
            if args.plan:
                Path(args.plan).write_text(plan.to_json())
            print(repr(float(d)), file=out)
            return EXIT_OK
        try:
            sc = Scenario.load(args.scenario)
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot load scenario {args.scenario}: {exc}") from exc
        name, report = run_scenario(sc, args.kind)
        for p in write_report(args.out, name, report):
            print(f"wrote {p}", file=out)
        print(summary_line(name, report), file=out)
        return EXIT_OK if report.ok else EXIT_VIOLATION
    except (UsageError, InvalidSpec) as exc:
        print(f"swarmkin: error: {exc}\n{SCHEMA_HINT}", file=err)
        return EXIT_USAGE
    except SwarmkinError as exc:
        print(f"swarmkin: invariant violation: {type(exc).__name__}: {exc}", file=err)
        return EXIT_VIOLATION


def main() -> None:
    sys.exit(cli_main())
