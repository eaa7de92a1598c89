"""Kinetic swarming models: atomic measures, exact W1, particle flows and a 1-D hydro solver."""
import os

import numba

# TBB is not always present; workqueue is always available and deterministic.
numba.config.THREADING_LAYER = os.environ.get("NUMBA_THREADING_LAYER", "workqueue")

if os.environ.get("SWARMKIN_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["SWARMKIN_THREADS"]), numba.config.NUMBA_NUM_THREADS)))

from . import errors  # noqa: E402
from .errors import SwarmkinError  # noqa: E402
from .measures import (  # noqa: E402
    DiscreteMeasure,
    PhasePoint,
    SpatialMeasure,
    first_marginal,
    mean_velocity,
    normalize,
    push_forward,
    support_radius,
    translate,
    velocity_diameter,
)
from .models import ModelSpec  # noqa: E402
from .transport import w1, w1_exact  # noqa: E402
from .dynamics import SimConfig, Trajectory, simulate, step_rk4  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "DiscreteMeasure",
    "SwarmkinError",
    "errors",
    "PhasePoint",
    "SpatialMeasure",
    "ModelSpec",
    "SimConfig",
    "Trajectory",
    "first_marginal",
    "mean_velocity",
    "normalize",
    "push_forward",
    "simulate",
    "step_rk4",
    "support_radius",
    "translate",
    "velocity_diameter",
    "w1",
    "w1_exact",
]
