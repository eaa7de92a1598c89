"""Fast closed-form checks run by ``swarmkin selftest``."""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from ..dynamics import SimConfig, simulate
from ..errors import DegenerateInitialDistance
from ..hydro import HydroConfig, HydroState, hydro_step
from ..measures import DiscreteMeasure, normalize, push_forward, support_radius
from ..models import (
    AlignmentSpec,
    ModelSpec,
    PotentialSpec,
    SelfPropulsionSpec,
    acceleration,
    communication_rate,
)
from ..transport import w1, w1_1d, w1_exact
from .experiments import run_flocking, run_stability


def _dirac_distance() -> bool:
    a = DiscreteMeasure.from_arrays([[0.0, 0.0]], [[0.0, 0.0]])
    b = DiscreteMeasure.from_arrays([[3.0, 0.0]], [[0.0, 4.0]])
    return abs(w1(a, b) - 5.0) < 1e-12


def _self_distance() -> bool:
    rng = np.random.default_rng(0)
    f = DiscreteMeasure.from_arrays(rng.normal(size=(7, 2)), rng.normal(size=(7, 2)), rng.uniform(0.1, 1, 7))
    d, plan = w1_exact(f, f)
    return d == 0.0 and plan.nnz <= 2 * f.n - 1


def _translation() -> bool:
    rng = np.random.default_rng(1)
    f = DiscreteMeasure.from_arrays(rng.normal(size=(6, 1)), np.zeros((6, 1)))
    g = f.with_state(f.x + 0.75, f.v)
    return abs(w1(f, g) - 0.75) < 1e-12 and abs(w1_1d(f, g, coordinate=0) - 0.75) < 1e-12


def _normalize() -> bool:
    f = normalize([(((0.0,), (1.0,)), 2.0), (((1.0,), (0.0,)), 6.0)])
    return abs(f.m.sum() - 1.0) < 1e-15 and abs(f.m[0] - 0.25) < 1e-15


def _identity_push() -> bool:
    f = DiscreteMeasure.from_arrays([[1.0], [2.0]], [[0.5], [-0.5]])
    g = push_forward(f, lambda p: p)
    return np.array_equal(f.x, g.x) and np.array_equal(f.v, g.v) and np.array_equal(f.m, g.m)


def _communication() -> bool:
    return communication_rate(0.0, 0.7) == 1.0 and abs(communication_rate(1.0, 0.5) - 1 / math.sqrt(2)) < 1e-15


def _propulsion_rest() -> bool:
    model = ModelSpec(dim=2, self_propulsion=SelfPropulsionSpec(1.0, 1.0))
    f = DiscreteMeasure.from_arrays([[0.0, 0.0]], [[0.0, 0.0]])
    return np.all(acceleration(f.x, f.v, f, model) == 0.0)


def _single_atom_potential() -> bool:
    model = ModelSpec(dim=2, potential=PotentialSpec())
    f = DiscreteMeasure.from_arrays([[0.3, -0.2]], [[0.0, 0.0]])
    return np.all(acceleration(f.x, f.v, f, model) == 0.0)


def _free_transport() -> bool:
    model = ModelSpec(dim=1, self_propulsion=SelfPropulsionSpec(0.0, 0.0))
    f = DiscreteMeasure.from_arrays([[0.0], [1.0]], [[1.0], [-2.0]])
    fT = simulate(f, SimConfig(model=model, dt=0.1, t_end=1.0)).states[-1]
    return np.allclose(fT.x[:, 0], [1.0, -1.0], atol=1e-14, rtol=0) and support_radius(fT) > 0


def _degenerate_stability() -> bool:
    model = ModelSpec(dim=1, alignment=AlignmentSpec(0.25))
    f = DiscreteMeasure.from_arrays([[0.0], [1.0]], [[0.0], [1.0]])
    try:
        run_stability(model, f, f, 0.1, 0.01)
    except DegenerateInitialDistance:
        return True
    return False


def _consensus_flocking() -> bool:
    f = DiscreteMeasure.from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]], [[0.3, 0.1]] * 3)
    rep = run_flocking(0.25, f, 0.5, 0.01)
    return rep.decay_ok and max(rep.velocity_diameter_series) < 1e-15


def _hydro_rest() -> bool:
    s = HydroState(50, 1.0, np.ones(50), np.full(50, 0.3))
    model = ModelSpec(dim=1, self_propulsion=SelfPropulsionSpec(0.0, 0.0))
    s2 = hydro_step(s, HydroConfig(model=model))
    return np.allclose(s2.rho, 1.0, atol=1e-14, rtol=0) and np.allclose(s2.u, 0.3, atol=1e-14, rtol=0)


CHECKS: dict[str, Callable[[], bool]] = {
    "w1 between Dirac masses": _dirac_distance,
    "w1 of a measure with itself": _self_distance,
    "w1 under rigid translation": _translation,
    "mass normalization": _normalize,
    "identity push-forward": _identity_push,
    "communication rate values": _communication,
    "self-propulsion vanishes at rest": _propulsion_rest,
    "single atom feels no potential force": _single_atom_potential,
    "free transport is exact": _free_transport,
    "identical data rejected by stability": _degenerate_stability,
    "consensus data keeps zero velocity spread": _consensus_flocking,
    "uniform hydro state is stationary": _hydro_rest,
}


def run_selftest(echo: Callable[[str], None] = print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            passed = bool(fn())
        except Exception as exc:  # report and keep going
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        echo(f"{'PASS' if passed else 'FAIL'}  {name}")
    return ok
