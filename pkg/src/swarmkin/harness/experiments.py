"""Experiment drivers producing JSON-serializable reports."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..dynamics import SimConfig, simulate
from ..errors import DegenerateInitialDistance, DimensionMismatch, InvalidSpec
from ..hydro import (
    HydroConfig,
    HydroState,
    hydro_run,
    monokinetic_init,
    monokineticity_deviation,
    reconstruct_fields,
)
from ..measures import DiscreteMeasure
from ..models import AlignmentSpec, ModelSpec, communication_rate
from ..transport import thin, w1_exact
from .scenario import Density1D, content_hash, sample_product, velocity_field_1d

OT_ATOM_CAP = 2000
ENVELOPE_SLACK = 0.05
MEANFIELD_SLACK = 0.20
FLOCKING_SLACK = 1e-6
DEGENERATE_W1 = 1e-12


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


class _Report:
    """Shared serialization: sorted keys, no timestamps, so bytes are reproducible."""

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def series_csv(self) -> str:
        cols = self._series_columns()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(cols))
        for row in zip(*cols.values()):
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
        return buf.getvalue()

    def _series_columns(self) -> dict:
        raise NotImplementedError


def _w1_capped(f: DiscreteMeasure, g: DiscreteMeasure, metric: str = "phase") -> tuple[float, float]:
    """W1 after thinning each side to the OT cap; returns (distance, thinning error bound)."""
    f2, ef = thin(f, OT_ATOM_CAP, metric)
    g2, eg = thin(g, OT_ATOM_CAP, metric)
    d, _ = w1_exact(f2, g2, metric=metric, cap=2 * OT_ATOM_CAP)
    return float(d), float(ef + eg)


# --------------------------------------------------------------------------
# stability


@dataclass
class StabilityReport(_Report):
    times: list
    w1_series: list
    initial_w1: float
    ratio_series: list
    fitted_log_rate: float
    fitted_log_intercept: float
    violation_count: int
    envelope: list
    worst_excess: float
    config: dict = field(default_factory=dict)
    input_hash: str = ""

    @property
    def ok(self) -> bool:
        return self.violation_count == 0 and abs(self.ratio_series[0] - 1.0) <= 1e-9

    def _series_columns(self):
        return {"t": self.times, "w1": self.w1_series, "ratio": self.ratio_series, "envelope": self.envelope}


def fit_log_envelope(times, ratios) -> tuple[float, float]:
    """Least-squares fit log r ~ a + C t with a clamped at >= 0.

    Returns (C, a). With the clamp active the slope is refit through the
    origin.
    """
    t = np.asarray(times, dtype=np.float64)
    y = np.log(np.asarray(ratios, dtype=np.float64))
    if t.size < 2 or np.ptp(t) == 0:
        return 0.0, max(0.0, float(np.mean(y)) if y.size else 0.0)
    C, a = np.polyfit(t, y, 1)
    if a < 0:
        a = 0.0
        C = float(t @ y / (t @ t))
    return float(C), float(a)


def run_stability(model, f0: DiscreteMeasure, g0: DiscreteMeasure, t_end: float, dt: float, stride: int = 1,
                  metric: str = "phase", config: dict | None = None) -> StabilityReport:
    if f0.dim != g0.dim:
        raise DimensionMismatch("f0 and g0 must share a dimension")
    d0, _ = _w1_capped(f0, g0, metric)
    if d0 <= DEGENERATE_W1:
        raise DegenerateInitialDistance(f"W1(f0, g0) = {d0:.3e}")
    cfg = SimConfig(model=model, dt=dt, t_end=t_end, record_every=stride)
    tf = simulate(f0, cfg)
    tg = simulate(g0, cfg)
    times = tf.times.tolist()
    series = [d0] + [_w1_capped(a, b, metric)[0] for a, b in zip(tf.states[1:], tg.states[1:])]
    ratios = [s / d0 for s in series]
    C, a = fit_log_envelope(times, ratios)
    env = [math.exp(a + C * t) for t in times]
    excess = [r / e - 1.0 for r, e in zip(ratios, env)]
    viol = sum(1 for x in excess if x > ENVELOPE_SLACK)
    return StabilityReport(times, series, d0, ratios, C, a, viol, env, max(excess), config or {},
                           content_hash(config or {}))


# --------------------------------------------------------------------------
# mean-field


@dataclass
class MeanFieldReport(_Report):
    n_values: list
    w1_to_reference: list
    thinning_error: list
    initial_w1_to_reference: list
    fitted_order: float
    nonincreasing_ok: bool
    decrease_ok: bool
    config: dict = field(default_factory=dict)
    input_hash: str = ""

    @property
    def ok(self) -> bool:
        return self.nonincreasing_ok and self.decrease_ok

    def _series_columns(self):
        return {"n": self.n_values, "w1_final": self.w1_to_reference, "w1_initial": self.initial_w1_to_reference,
                "thinning_error": self.thinning_error}


def run_meanfield(model, sampler_spec: dict, n_values, t_end: float, dt: float, metric: str = "phase",
                  config: dict | None = None) -> MeanFieldReport:
    """Particle runs at increasing N against the largest-N reference run.

    ``sampler_spec``: {"x": Density1D dict, "v": Density1D dict,
    "method": "halton" (default) | "quantile" | "random", "seed": int}.
    """
    n_values = [int(n) for n in n_values]
    if len(n_values) < 2 or any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise InvalidSpec("n_values must be strictly increasing with at least two entries")
    dim = model.dim
    xd, vd = Density1D.from_dict(sampler_spec["x"]), Density1D.from_dict(sampler_spec["v"])
    method = sampler_spec.get("method", "halton")
    seed = int(sampler_spec.get("seed", 0))
    cfg = SimConfig(model=model, dt=dt, t_end=t_end, record_every=10**9)
    init, final = {}, {}
    for n in n_values:
        f0 = sample_product(n, dim, xd, vd, method, seed)
        init[n] = f0
        final[n] = simulate(f0, cfg).states[-1]
    ref = n_values[-1]
    w_final, w_init, thin_err = [], [], []
    for n in n_values:
        if n == ref:
            w_final.append(0.0)
            w_init.append(0.0)
            thin_err.append(0.0)
            continue
        d, e = _w1_capped(final[n], final[ref], metric)
        d0, _ = _w1_capped(init[n], init[ref], metric)
        w_final.append(d)
        w_init.append(d0)
        thin_err.append(e)
    body = n_values[:-1]
    wb = w_final[:-1]
    if len(body) >= 2 and all(w > 0 for w in wb):
        order = float(np.polyfit(np.log(body), np.log(wb), 1)[0])
    else:
        order = float("nan")
    nonincr = all(b <= (1 + MEANFIELD_SLACK) * a for a, b in zip(w_final, w_final[1:]))
    decrease = len(wb) < 2 or wb[-1] < wb[0]
    return MeanFieldReport(n_values, w_final, thin_err, w_init, order, nonincr, decrease, config or {},
                           content_hash(config or {}))


# --------------------------------------------------------------------------
# flocking


@dataclass
class FlockingReport(_Report):
    times: list
    velocity_diameter_series: list
    spatial_radius_series: list
    max_spatial_radius: float
    lambda_bound: float
    bound_series: list
    decay_ok: bool
    violation_count: int
    mean_velocity_drift: float
    config: dict = field(default_factory=dict)
    input_hash: str = ""

    @property
    def ok(self) -> bool:
        return self.decay_ok

    def _series_columns(self):
        return {"t": self.times, "velocity_diameter": self.velocity_diameter_series,
                "bound": self.bound_series, "spatial_radius": self.spatial_radius_series}


def run_flocking(gamma: float, f0: DiscreteMeasure, t_end: float, dt: float, record_every: int = 1,
                 config: dict | None = None) -> FlockingReport:
    """Velocity-radius decay against R_v(0) exp(-w(2 Rbar) t).

    Rbar is the largest spatial radius about the center of mass over all
    recorded times; with unit total mass the center moves at the constant
    mean velocity.
    """
    model = ModelSpec(dim=f0.dim, alignment=AlignmentSpec(gamma=float(gamma)))
    traj = simulate(f0, SimConfig(model=model, dt=dt, t_end=t_end, record_every=record_every,
                                  store_states=False))
    rbar = float(np.max(traj.spatial_radius))
    lam = float(communication_rate(2.0 * rbar, float(gamma)))
    rv0 = float(traj.velocity_diameter[0])
    bound = rv0 * np.exp(-lam * traj.times)
    ok_mask = traj.velocity_diameter <= bound * (1 + FLOCKING_SLACK) + 1e-15
    drift = float(np.max(np.linalg.norm(traj.mean_velocity - traj.mean_velocity[0], axis=1)))
    return FlockingReport(traj.times.tolist(), traj.velocity_diameter.tolist(), traj.spatial_radius.tolist(), rbar,
                          lam, bound.tolist(), bool(np.all(ok_mask)), int(np.sum(~ok_mask)), drift, config or {},
                          content_hash(config or {}))


# --------------------------------------------------------------------------
# hydro vs particles


@dataclass
class HydroComparisonReport(_Report):
    resolutions: list
    field_errors: list
    w1_errors: list
    monokineticity_series: list
    mass_drift: list
    grid_steps: list
    errors_decrease: bool
    config: dict = field(default_factory=dict)
    input_hash: str = ""

    @property
    def ok(self) -> bool:
        return self.errors_decrease and max(self.mass_drift) <= 1e-9

    def _series_columns(self):
        return {
            "n_atoms": [r[0] for r in self.resolutions],
            "n_cells": [r[1] for r in self.resolutions],
            "rho_error": [e["rho"] for e in self.field_errors],
            "u_error": [e["u"] for e in self.field_errors],
            "w1_error": self.w1_errors,
            "monokineticity": self.monokineticity_series,
        }


@dataclass
class HydroSetup:
    """Grid problem on [0, L): density profile, velocity field, model and CFL."""

    model: ModelSpec
    domain_length: float
    rho0: dict
    u0: dict
    cfl: float = 0.4
    particle_dt: float = 5e-3
    shock_threshold: float = 0.5

    def initial_state(self, n_cells: int) -> HydroState:
        dens = Density1D.from_dict(self.rho0)
        return HydroState.from_profiles(n_cells, self.domain_length, dens.pdf,
                                        velocity_field_1d(self.u0, self.domain_length))


def compare_once(setup: HydroSetup, n_atoms: int, n_cells: int, t_end: float) -> dict:
    grid0 = setup.initial_state(n_cells)
    f0 = monokinetic_init(grid0, n_atoms)
    if t_end > 0:
        cfg = HydroConfig(model=setup.model, cfl=setup.cfl, t_end=t_end, shock_threshold=setup.shock_threshold)
        states = hydro_run(grid0, cfg, record_every=1)
        grid = states[-1]
        drift = max(abs(s.mass - 1.0) for s in states)
        dt = min(setup.particle_dt, t_end)
        fT = simulate(f0, SimConfig(model=setup.model, dt=dt, t_end=t_end, record_every=10**9)).states[-1]
        steps = len(states) - 1
    else:
        grid, fT, drift, steps = grid0, f0, abs(grid0.mass - 1.0), 0
    rec = reconstruct_fields(fT, n_cells, setup.domain_length, t_end)
    live = ~rec.empty
    rho_err = float(np.max(np.abs(rec.rho - grid.rho)))
    u_err = float(np.max(np.abs(rec.u[live] - grid.u[live]))) if np.any(live) else 0.0
    w1_err, _ = _w1_capped(fT, monokinetic_init(grid, n_atoms))
    return {
        "rho": rho_err,
        "u": u_err,
        "w1": w1_err,
        "mono": monokineticity_deviation(fT, grid),
        "mass_drift": float(drift),
        "steps": steps,
    }


def run_hydro_comparison(setup: HydroSetup, resolutions, t_end: float, config: dict | None = None
                         ) -> HydroComparisonReport:
    if setup.model.dim != 1:
        raise InvalidSpec("hydro comparison is one-dimensional")
    res = [(int(a), int(c)) for a, c in resolutions]
    rows = [compare_once(setup, a, c, t_end) for a, c in res]
    dec = all(
        b["rho"] < a["rho"] and b["u"] < a["u"] and b["w1"] < a["w1"] for a, b in zip(rows, rows[1:])
    )
    return HydroComparisonReport(
        resolutions=[list(r) for r in res],
        field_errors=[{"rho": r["rho"], "u": r["u"]} for r in rows],
        w1_errors=[r["w1"] for r in rows],
        monokineticity_series=[r["mono"] for r in rows],
        mass_drift=[r["mass_drift"] for r in rows],
        grid_steps=[r["steps"] for r in rows],
        errors_decrease=bool(dec),
        config=config or {},
        input_hash=content_hash(config or {}),
    )
