"""E-SFI: emotion-split susceptible-forwarding-immune propagation model.

Forward simulation of the five-compartment system with per-emotion
cumulative forwarding counters, least-squares calibration against observed
cumulative series, and Latin-hypercube / PRCC sensitivity analysis with
parameter sweeps and intervention scenarios.
"""

from .backend import available_backends, default_backend
from .calibration import (
    FitConfig,
    FitResult,
    default_bounds,
    default_initial_guess,
    fit,
    fit_report_dict,
    ls_error,
    model_residuals,
    residual_report,
)
from .data import (
    ObservedDataset,
    builtin_negative_event,
    export_trajectory,
    load_csv,
    load_dataset,
)
from .errors import (
    AnalysisError,
    DomainError,
    EsfiError,
    IntegrationError,
    NotYetStableError,
    ParseError,
)
from .integrator import (
    Emotion,
    TimeGrid,
    Trajectory,
    integrate,
    peak_instantaneous,
    stable_cumulative,
)
from .model import (
    PARAM_IDS,
    STATE_IDS,
    ModelParams,
    PopulationState,
    conservation_total,
    make_initial_state,
    rhs,
    validate_params,
)
from .sensitivity import (
    INDEX_IDS,
    ParameterRanges,
    SampleMatrix,
    SensitivityReport,
    classify_correlation,
    compute_indices,
    lhs_sample,
    prcc,
    sensitivity_run,
    sweep_grid,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "DomainError",
    "Emotion",
    "EsfiError",
    "FitConfig",
    "FitResult",
    "INDEX_IDS",
    "IntegrationError",
    "ModelParams",
    "NotYetStableError",
    "ObservedDataset",
    "PARAM_IDS",
    "ParameterRanges",
    "ParseError",
    "PopulationState",
    "STATE_IDS",
    "SampleMatrix",
    "SensitivityReport",
    "TimeGrid",
    "Trajectory",
    "available_backends",
    "builtin_negative_event",
    "classify_correlation",
    "compute_indices",
    "conservation_total",
    "default_backend",
    "default_bounds",
    "default_initial_guess",
    "export_trajectory",
    "fit",
    "fit_report_dict",
    "integrate",
    "lhs_sample",
    "load_csv",
    "load_dataset",
    "ls_error",
    "make_initial_state",
    "model_residuals",
    "peak_instantaneous",
    "prcc",
    "residual_report",
    "rhs",
    "sensitivity_run",
    "stable_cumulative",
    "sweep_grid",
    "validate_params",
]
