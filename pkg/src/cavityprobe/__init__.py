"""Unruh-DeWitt probe response through a Dirichlet optical cavity.

Forward simulation of the leading-order transition probability of a
two-level atom crossing a cavity on a relativistically accelerated,
harmonically perturbed trajectory, the relative-sensitivity sweeps built
on it, and the inverse least-squares recovery of the perturbation
parameters from observed probabilities.
"""

from .cavity import CavityConfig, mode_frequency, mode_function, mode_profile
from .errors import (
    BracketFailure,
    CausalityViolation,
    CavityProbeError,
    DegenerateObservations,
    DivisionByZeroBaseline,
    InvalidProbability,
    NonConvergence,
    NonMonotonic,
    SchemaError,
    ValidationError,
)
from .experiment import ExperimentSetup
from .inverse import (
    EstimationResult,
    ObservationSet,
    PerturbationEstimator,
    ProbeSweepModel,
    fit_perturbation,
    synthesize_observations,
)
from .metrology import (
    SensitivityCurve,
    SensitivityPoint,
    amplitude_sweep,
    frequency_spectrum,
    grid_sweep,
    sensitivity,
)
from .response import (
    DetectorConfig,
    FieldPreparation,
    ResponseResult,
    brute_force_response_integral,
    detector_density_matrix,
    response_integral,
    transition_probability,
)
from .worldline import (
    LAB_FRAME,
    PROPER_FRAME,
    LabFramePerturbation,
    LabFrameWorldline,
    ProperFramePerturbation,
    ProperFrameWorldline,
    Worldline,
    crossing_time_lab,
    crossing_time_proper,
    lab_position,
    lab_proper_time,
    lab_speed,
    make_worldline,
    proper_worldline,
    rapidity,
    validate_timelike,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CavityConfig",
    "CavityProbeError",
    "DetectorConfig",
    "EstimationResult",
    "ExperimentSetup",
    "FieldPreparation",
    "LabFramePerturbation",
    "LabFrameWorldline",
    "ObservationSet",
    "PerturbationEstimator",
    "ProbeSweepModel",
    "ProperFramePerturbation",
    "ProperFrameWorldline",
    "ResponseResult",
    "SensitivityCurve",
    "SensitivityPoint",
    "Worldline",
    "amplitude_sweep",
    "brute_force_response_integral",
    "crossing_time_lab",
    "crossing_time_proper",
    "detector_density_matrix",
    "fit_perturbation",
    "frequency_spectrum",
    "grid_sweep",
    "lab_position",
    "lab_proper_time",
    "lab_speed",
    "make_worldline",
    "mode_frequency",
    "mode_function",
    "mode_profile",
    "proper_worldline",
    "rapidity",
    "response_integral",
    "sensitivity",
    "synthesize_observations",
    "transition_probability",
    "validate_timelike",
    "LAB_FRAME",
    "PROPER_FRAME",
]
