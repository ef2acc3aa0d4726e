"""Exception types shared across the package."""


class CavityProbeError(Exception):
    """Base class for all errors raised by cavityprobe."""


class ValidationError(CavityProbeError):
    """A configuration value violates a documented invariant."""


class SchemaError(CavityProbeError):
    """A config document does not match the expected schema.

    The message carries the offending key path.
    """


class NonConvergence(CavityProbeError):
    """An adaptive quadrature could not certify the requested tolerance
    within its subdivision budget."""


class BracketFailure(CavityProbeError):
    """Root bracketing failed: the trajectory never reached the target
    within the expansion budget."""


class NonMonotonic(CavityProbeError):
    """The lab-frame position backtracks inside the root-refinement
    bracket, so a unique first crossing cannot be certified."""


class CausalityViolation(CavityProbeError):
    """The worldline reaches or exceeds the speed of light."""


class InvalidProbability(CavityProbeError):
    """A probability left [0, 1]; the perturbative expansion broke down."""


class DivisionByZeroBaseline(CavityProbeError):
    """The unperturbed transition probability is zero, so the relative
    sensitivity estimator is undefined."""


class DegenerateObservations(CavityProbeError):
    """All observed probabilities are identical; no parameter information."""
