"""Run every shipped scenario (or the named ones) and write reports to --out."""
import argparse
import time

from swarmkin.harness.runner import run_scenario, summary_line, write_report
from swarmkin.harness.scenario import Scenario, list_scenarios


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("names", nargs="*", help="scenario names (default: all shipped)")
    p.add_argument("--out", default="out")
    args = p.parse_args()
    ok = True
    for name in args.names or list_scenarios():
        t0 = time.perf_counter()
        kind, report = run_scenario(Scenario.load(name))
        write_report(f"{args.out}/{name}", kind, report)
        print(f"{summary_line(kind, report)}  [{name}, {time.perf_counter() - t0:.1f} s]")
        ok &= bool(report.ok)
    raise SystemExit(0 if ok else 2)


if __name__ == "__main__":
    main()
