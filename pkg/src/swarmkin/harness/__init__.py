from .experiments import (
    FlockingReport,
    HydroComparisonReport,
    HydroSetup,
    MeanFieldReport,
    StabilityReport,
    fit_log_envelope,
    run_flocking,
    run_hydro_comparison,
    run_meanfield,
    run_stability,
)
from .scenario import Density1D, Scenario, content_hash, list_scenarios

__all__ = [
    "Density1D",
    "FlockingReport",
    "HydroComparisonReport",
    "HydroSetup",
    "MeanFieldReport",
    "Scenario",
    "StabilityReport",
    "content_hash",
    "fit_log_envelope",
    "list_scenarios",
    "run_flocking",
    "run_hydro_comparison",
    "run_meanfield",
    "run_stability",
]
