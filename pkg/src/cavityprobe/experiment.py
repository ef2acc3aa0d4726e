"""One-stop configuration bundle for a probe-crossing experiment.

Sweeps, the inverse estimator, and the CLI all need the same thing: given
fixed cavity/detector/field settings, evaluate the transition probability
for a perturbation (epsilon, gamma).  ``ExperimentSetup`` owns that
mapping and the worldline construction behind it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .cavity import CavityConfig
from .errors import ValidationError
from .response import (
    DetectorConfig,
    FieldPreparation,
    ResponseResult,
    transition_probability,
)
from .worldline import (
    LAB_FRAME,
    PROPER_FRAME,
    LabFramePerturbation,
    ProperFramePerturbation,
    Scenario,
    TauMode,
    Worldline,
    make_worldline,
)


@dataclass(frozen=True)
class ExperimentSetup:
    """Everything that stays fixed while (epsilon, gamma) vary."""

    scenario: Scenario
    a0: float
    cavity: CavityConfig
    detector: DetectorConfig
    field: FieldPreparation
    xi0: float = 0.0
    x0: float = 0.0
    t0: float = 0.0
    quad_tol: float = 1e-8
    root_tol: float = 1e-12
    worldline_tol: float = 1e-12
    tau_mode: TauMode = "linearized"
    drop_redshift: bool = False

    def __post_init__(self):
        if self.scenario not in (PROPER_FRAME, LAB_FRAME):
            raise ValidationError(f"unknown scenario: {self.scenario!r}")
        for name in ("quad_tol", "root_tol", "worldline_tol"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ValidationError(f"{name} must lie in (0, 1), got {v}")

    def perturbation(self, epsilon: float, gamma: float):
        if self.scenario == PROPER_FRAME:
            return ProperFramePerturbation(
                a0=self.a0,
                epsilon=epsilon,
                gamma=gamma,
                xi0=self.xi0,
                x0=self.x0,
                t0=self.t0,
            )
        return LabFramePerturbation(a=self.a0, epsilon=epsilon, gamma=gamma)

    def worldline(self, epsilon: float, gamma: float) -> Worldline:
        return make_worldline(
            self.perturbation(epsilon, gamma),
            self.cavity.L,
            eval_tol=self.worldline_tol,
            root_tol=self.root_tol,
            tau_mode=self.tau_mode,
        )

    def probability(self, epsilon: float, gamma: float) -> ResponseResult:
        w = self.worldline(epsilon, gamma)
        return transition_probability(
            w,
            self.detector,
            self.cavity,
            self.field,
            tol=self.quad_tol,
            drop_redshift=self.drop_redshift,
        )

    def with_detector_gap(self, Omega: float) -> "ExperimentSetup":
        return replace(self, detector=replace(self.detector, Omega=Omega))

    def describe(self) -> dict:
        """Nested dict of the full configuration (for sweep metadata)."""
        return asdict(self)
