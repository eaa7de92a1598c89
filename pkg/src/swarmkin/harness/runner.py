"""Dispatch a scenario to its experiment and write reports to disk."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from ..dynamics import SimConfig, simulate
from ..errors import InvalidSpec
from .experiments import (
    HydroSetup,
    _Report,
    run_flocking,
    run_hydro_comparison,
    run_meanfield,
    run_stability,
)
from .scenario import Scenario, perturb

REPORT_NAMES = {
    "simulate": "simulation_report",
    "stability": "stability_report",
    "meanfield": "meanfield_report",
    "flocking": "flocking_report",
    "hydro_comparison": "hydro_report",
}


@dataclass
class SimulationReport(_Report):
    times: list
    support_radius: list
    mean_velocity: list
    velocity_diameter: list
    growth_rate: float
    n_steps: int
    final_speeds: list
    config: dict = field(default_factory=dict)
    input_hash: str = ""
    trajectory_jsonl: str = field(default="", repr=False)

    @property
    def ok(self) -> bool:
        return bool(np.isfinite(self.growth_rate))

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.pop("trajectory_jsonl")
        return d

    def _series_columns(self):
        mv = np.asarray(self.mean_velocity)
        cols = {"t": self.times, "support_radius": self.support_radius, "velocity_diameter": self.velocity_diameter}
        for k in range(mv.shape[1]):
            cols[f"mean_velocity_{k}"] = mv[:, k].tolist()
        return cols


def _config_block(sc: Scenario) -> dict:
    return {"scenario": sc.resolved(), "threads": int(numba.get_num_threads())}


def run_scenario(sc: Scenario, kind: str | None = None) -> tuple[str, _Report]:
    """Run the scenario's experiment (or ``kind``) and return (report name, report)."""
    kind = kind or sc.experiment.get("kind", "simulate")
    exp = sc.experiment
    cfg = _config_block(sc)
    if kind == "simulate":
        f0 = sc.initial()
        traj = simulate(f0, SimConfig(model=sc.model, dt=sc.dt, t_end=sc.t_end, record_every=sc.record_every))
        rep = SimulationReport(
            traj.times.tolist(), traj.support_radius.tolist(), traj.mean_velocity.tolist(),
            traj.velocity_diameter.tolist(), float(traj.growth_rate), traj.n_steps,
            np.linalg.norm(traj.states[-1].v, axis=1).tolist(), cfg, "",
            traj.to_jsonl(include_atoms=True),
        )
    elif kind == "stability":
        f0 = sc.initial()
        g0 = perturb(f0, float(exp.get("perturbation", 1e-3)), int(exp.get("perturbation_seed", 1)))
        rep = run_stability(sc.model, f0, g0, sc.t_end, sc.dt, sc.record_every, exp.get("metric", "phase"), cfg)
    elif kind == "meanfield":
        init = sc.raw.get("initial", {})
        if init.get("type") != "product":
            raise InvalidSpec("meanfield needs a 'product' initial block")
        rep = run_meanfield(sc.model, init, exp["n_values"], sc.t_end, sc.dt, exp.get("metric", "phase"), cfg)
    elif kind == "flocking":
        if sc.model.terms() != ["alignment"]:
            raise InvalidSpec("flocking needs an alignment-only model")
        rep = run_flocking(sc.model.alignment.gamma, sc.initial(), sc.t_end, sc.dt, sc.record_every, cfg)
    elif kind == "hydro_comparison":
        setup = HydroSetup(
            model=sc.model,
            domain_length=float(exp["domain_length"]),
            rho0=exp["rho0"],
            u0=exp["u0"],
            cfl=float(exp.get("cfl", 0.4)),
            particle_dt=sc.dt,
            shock_threshold=float(exp.get("shock_threshold", 0.5)),
        )
        rep = run_hydro_comparison(setup, exp["resolutions"], sc.t_end, cfg)
    else:
        raise InvalidSpec(f"unknown experiment kind {kind!r}")
    rep.input_hash = sc.content_hash()
    return REPORT_NAMES[kind], rep


def write_report(out_dir, name: str, report: _Report) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{name}.json", out / f"{name}.csv"]
    paths[0].write_text(report.to_json())
    paths[1].write_text(report.series_csv())
    if isinstance(report, SimulationReport) and report.trajectory_jsonl:
        p = out / "trajectory.jsonl"
        p.write_text(report.trajectory_jsonl)
        paths.append(p)
    return paths


def summary_line(name: str, report: _Report) -> str:
    d = report.to_dict()
    keys = [k for k in ("violation_count", "fitted_log_rate", "fitted_order", "decay_ok", "lambda_bound",
                        "errors_decrease", "growth_rate") if k in d]
    return f"{name}: ok={report.ok} " + " ".join(f"{k}={json.dumps(d[k])}" for k in keys)
