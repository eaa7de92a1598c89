"""Envelope violations of the stability experiment as the horizon grows.

The D'Orsogna W1 ratio grows roughly exponentially while speeds relax
toward sqrt(alpha/beta) and then roughly linearly, so a single fitted
exponential stops covering the series at long horizons. This sweep shows
where that happens for a scenario's initial data.
"""
import argparse

from swarmkin.harness.experiments import run_stability
from swarmkin.harness.scenario import Scenario, perturb


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scenario", default="dorsogna_small")
    p.add_argument("--horizons", type=float, nargs="+", default=[1.0, 2.0, 3.0, 5.0, 10.0])
    args = p.parse_args()
    sc = Scenario.load(args.scenario)
    f0 = sc.initial()
    g0 = perturb(f0, float(sc.experiment.get("perturbation", 1e-3)), int(sc.experiment.get("perturbation_seed", 0)))
    print("t_end  records  violations  worst_excess  fitted_C")
    for T in args.horizons:
        rep = run_stability(sc.model, f0, g0, T, sc.dt, stride=sc.record_every)
        print(f"{T:5g}  {len(rep.times):7d}  {rep.violation_count:10d}  {rep.worst_excess:12.4f}  {rep.fitted_log_rate:8.4f}")


if __name__ == "__main__":
    main()
