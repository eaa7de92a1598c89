"""Characteristic flow of an atomic measure.

For atomic data the kinetic solution is the empirical measure of the
particle system dx_i/dt = v_i, dv_i/dt = H[f_t](x_i, v_i), so simulating
the particles *is* the push-forward of f_0 along the characteristics.
Time stepping is fixed-step classical RK4; every stage re-evaluates the
field against that stage's intermediate atom cloud. Masses are never
written after construction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import DimensionMismatch, NonFiniteState
from .measures import (
    DiscreteMeasure,
    mean_velocity,
    spatial_radius,
    support_radius,
    velocity_diameter,
)
from .models import ModelSpec, acceleration

# A synthetic model is any callable (x, v, m, t) -> dv/dt, used for
# closed-form oracle tests.
Model = Union[ModelSpec, Callable]


@dataclass
class SimConfig:
    model: Model
    dt: float = 1e-3
    t_end: float = 1.0
    record_every: int = 1
    seed: int = 0
    store_states: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end >= self.dt * (1 - 1e-12):
            raise ValueError("t_end must be at least dt")
        if not (isinstance(self.record_every, int) and self.record_every >= 1):
            raise ValueError("record_every must be a positive integer")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    support_radius: np.ndarray
    mean_velocity: np.ndarray
    velocity_diameter: np.ndarray
    spatial_radius: np.ndarray
    growth_rate: float = 0.0
    n_steps: int = 0

    def records(self, include_atoms: bool = False):
        for k, t in enumerate(self.times):
            rec = {
                "t": float(t),
                "support_radius": float(self.support_radius[k]),
                "mean_velocity": self.mean_velocity[k].tolist(),
                "velocity_diameter": float(self.velocity_diameter[k]),
            }
            if include_atoms and self.states:
                rec["atoms"] = self.states[k].to_dict()["atoms"]
            yield rec

    def to_jsonl(self, include_atoms: bool = False) -> str:
        return "".join(json.dumps(r) + "\n" for r in self.records(include_atoms))


def _accel(x, v, m, model: Model, t: float) -> np.ndarray:
    if isinstance(model, ModelSpec):
        return acceleration(x, v, DiscreteMeasure(x, v, m), model)
    return np.asarray(model(x, v, m, t), dtype=np.float64).reshape(x.shape)


def rhs(state: DiscreteMeasure, model: Model, t: float = 0.0):
    """(dx/dt, dv/dt) for every atom."""
    if isinstance(model, ModelSpec) and model.dim != state.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs state dim {state.dim}")
    return state.v.copy(), _accel(state.x, state.v, state.m, model, t)


def _rk4_arrays(x, v, m, model, t, dt):
    def stage(xs, vs, ts):
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(vs))):
            raise NonFiniteState(ts)
        return vs, _accel(xs, vs, m, model, ts)

    k1x, k1v = stage(x, v, t)
    h = 0.5 * dt
    k2x, k2v = stage(x + h * k1x, v + h * k1v, t + h)
    k3x, k3v = stage(x + h * k2x, v + h * k2v, t + h)
    k4x, k4v = stage(x + dt * k3x, v + dt * k3v, t + dt)
    xn = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    vn = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(xn)) and np.all(np.isfinite(vn))):
        raise NonFiniteState(t + dt)
    return xn, vn


def step_rk4(state: DiscreteMeasure, model: Model, t: float, dt: float) -> DiscreteMeasure:
    if not dt > 0:
        raise ValueError("dt must be positive")
    if isinstance(model, ModelSpec) and model.dim != state.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs state dim {state.dim}")
    xn, vn = _rk4_arrays(state.x, state.v, state.m, model, t, dt)
    return state.with_state(xn, vn)


def step_schedule(dt: float, t_end: float) -> list[float]:
    """Step sizes covering [0, t_end]: full steps plus one short final step if needed."""
    n_full = int(math.floor(t_end / dt + 1e-9))
    steps = [dt] * n_full
    rest = t_end - n_full * dt
    if rest > 1e-12 * max(t_end, 1.0):
        steps.append(rest)
    return steps


def simulate(f0: DiscreteMeasure, config: SimConfig) -> Trajectory:
    model = config.model
    if isinstance(model, ModelSpec) and model.dim != f0.dim:
        raise DimensionMismatch(f"model dim {model.dim} vs state dim {f0.dim}")
    steps = step_schedule(config.dt, config.t_end)
    times, states, diag = [], [], []

    def record(t, st):
        times.append(t)
        if config.store_states:
            states.append(st)
        diag.append((support_radius(st), mean_velocity(st), velocity_diameter(st), spatial_radius(st)))

    x, v, m = f0.x, f0.v, f0.m
    state = f0
    record(0.0, f0)
    t = 0.0
    for k, h in enumerate(steps, start=1):
        x, v = _rk4_arrays(x, v, m, model, t, h)
        t = k * config.dt if h == config.dt else config.t_end
        if k % config.record_every == 0 or k == len(steps):
            state = f0.with_state(x, v)
            record(t, state)

    sr = np.array([d[0] for d in diag])
    times_a = np.array(times)
    growth = 0.0
    if sr[0] > 0:
        with np.errstate(divide="ignore"):
            rates = np.log(sr[1:] / sr[0]) / times_a[1:]
        if rates.size:
            growth = max(0.0, float(np.max(rates)))
    elif np.any(sr[1:] > 0):
        growth = math.inf
    return Trajectory(
        times=times_a,
        states=states,
        support_radius=sr,
        mean_velocity=np.array([d[1] for d in diag]),
        velocity_diameter=np.array([d[2] for d in diag]),
        spatial_radius=np.array([d[3] for d in diag]),
        growth_rate=growth,
        n_steps=len(steps),
    )


@dataclass
class DisplacementReport:
    constant: float
    consecutive_w1: np.ndarray
    worst_ratio: float
    ok: bool
    pairs_checked: int = 0
    extras: dict = field(default_factory=dict)


def flow_map_displacement_bound(traj: Trajectory, slack: float = 0.05, metric: str = "phase") -> DisplacementReport:
    """Fit the smallest C with W1(f_s, f_t) <= C |t - s| on consecutive records,
    then check it over every recorded pair with relative ``slack``."""
    from .transport import w1

    if len(traj.states) < 3:
        raise ValueError("need at least 3 recorded states")
    S, T = traj.states, traj.times
    K = len(S)
    D = np.zeros((K, K))
    for i in range(K):
        for j in range(i + 1, K):
            D[i, j] = D[j, i] = w1(S[i], S[j], metric=metric)
    cons = np.array([D[i, i + 1] for i in range(K - 1)])
    C = float(np.max(cons / np.diff(T)))
    worst = 0.0
    ok = True
    for i in range(K):
        for j in range(i + 1, K):
            bound = C * (T[j] - T[i])
            if D[i, j] > (1 + slack) * bound + 1e-12:
                ok = False
            if bound > 0:
                worst = max(worst, D[i, j] / bound)
    return DisplacementReport(C, cons, worst, ok, K * (K - 1) // 2)
