"""Self-check oracle suite behind ``cavityprobe validate``.

Each check pits an independent computation against the production path:
closed-form hyperbolic trajectories, a uniform Riemann sum against the
adaptive integrator, proper-frame versus lab-frame probabilities at zero
perturbation, and the sensitivity null.  Meant as a fast smoke test of an
installed build; the pytest suite runs the full acceptance versions.
"""

from __future__ import annotations

import numpy as np

from .cavity import CavityConfig
from .experiment import ExperimentSetup
from .metrology import sensitivity
from .response import (
    DetectorConfig,
    FieldPreparation,
    brute_force_response_integral,
    response_integral,
)
from .worldline import (
    LAB_FRAME,
    PROPER_FRAME,
    ProperFramePerturbation,
    crossing_time_proper,
    proper_worldline,
)


def _check_closed_form_trajectory() -> float:
    worst = 0.0
    for a0 in (0.005, 0.05, 0.5, 1.0):
        p = ProperFramePerturbation(a0=a0)
        T = crossing_time_proper(p, 1.0)
        T_exact = np.arccosh(1.0 + a0) / a0
        worst = max(worst, abs(T - T_exact) / T_exact)
        for tau in np.linspace(0.0, T_exact, 7)[1:]:
            x, t = proper_worldline(p, tau, 1e-13)
            worst = max(worst, abs(x - (np.cosh(a0 * tau) - 1) / a0))
            worst = max(worst, abs(t - np.sinh(a0 * tau) / a0))
    return worst


def _check_riemann_oracle() -> float:
    c = CavityConfig(L=1.0, n_max=50, n_min=5, mode_tail_tol=1e-4)
    worst = 0.0
    for scenario, a0, n, Omega in [
        (PROPER_FRAME, 0.5, 3, 7.0),
        (PROPER_FRAME, 1.0, 8, 12.0),
        (LAB_FRAME, 0.5, 3, 7.0),
        (LAB_FRAME, 1.0, 8, 12.0),
    ]:
        setup = ExperimentSetup(
            scenario=scenario,
            a0=a0,
            cavity=c,
            detector=DetectorConfig(Omega=Omega, coupling=0.01),
            field=FieldPreparation(),
        )
        w = setup.worldline(0.0, 0.0)
        d = setup.detector
        fast = response_integral(w, d, c, n, +1, tol=1e-9)
        slow = brute_force_response_integral(w, d, c, n, +1, 400_000)
        worst = max(worst, abs(fast - slow) / max(abs(fast), 1e-30))
    return worst


def _check_cross_frame() -> float:
    worst = 0.0
    for a0 in (0.2, 1.0):
        kwargs = dict(
            a0=a0,
            cavity=CavityConfig(L=1.0, n_max=40, n_min=5, mode_tail_tol=1e-4),
            detector=DetectorConfig(Omega=7.0, coupling=0.01),
            field=FieldPreparation(mode_index=1, alpha=5.0),
        )
        p_proper = ExperimentSetup(scenario=PROPER_FRAME, **kwargs).probability(0, 0)
        p_lab = ExperimentSetup(scenario=LAB_FRAME, **kwargs).probability(0, 0)
        worst = max(worst, abs(p_proper.P - p_lab.P) / p_proper.P)
    return worst


def _check_null_sensitivity() -> float:
    setup = ExperimentSetup(
        scenario=PROPER_FRAME,
        a0=0.5,
        cavity=CavityConfig(L=1.0, n_max=30, n_min=5, mode_tail_tol=1e-4),
        detector=DetectorConfig(Omega=7.0, coupling=0.01),
        field=FieldPreparation(mode_index=1, alpha=5.0),
    )
    baseline = setup.probability(0.0, 0.0)
    worst = 0.0
    for gamma in (0.7, 3.0, 11.0):
        worst = max(worst, sensitivity(setup.probability(0.0, gamma).P, baseline.P))
    return worst


_CHECKS = [
    ("closed-form-trajectory", _check_closed_form_trajectory, 1e-10),
    ("riemann-oracle", _check_riemann_oracle, 1e-6),
    ("cross-frame-consistency", _check_cross_frame, 1e-6),
    ("null-sensitivity", _check_null_sensitivity, 1e-6),
]


def run_validation_suite():
    """Run every oracle check; returns (failure count, report lines)."""
    failures = 0
    lines = []
    for name, fn, bound in _CHECKS:
        try:
            worst = fn()
            ok = worst <= bound
        except Exception as exc:  # a check crashing is a failure, not an abort
            lines.append(f"FAIL {name}: {type(exc).__name__}: {exc}")
            failures += 1
            continue
        if ok:
            lines.append(f"PASS {name}: worst deviation {worst:.3e} <= {bound:g}")
        else:
            lines.append(f"FAIL {name}: worst deviation {worst:.3e} > {bound:g}")
            failures += 1
    lines.append(
        f"{len(_CHECKS) - failures}/{len(_CHECKS)} checks passed"
    )
    return failures, lines
