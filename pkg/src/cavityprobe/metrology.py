"""Sensitivity estimator and parameter sweeps.

The figure-of-merit is the relative change of the transition probability
between the perturbed and unperturbed trajectory,

    S(eps, gamma) = |P(eps, gamma) - P(0)| / P(0).

P(0) never reads gamma (the unperturbed pipeline drops the harmonic term
entirely), so every sweep computes one baseline and shares it across all
points.  Sweep points are independent and may run on a thread pool; the
curve is always assembled by grid index, never by completion order, so
outputs are bit-identical for any thread count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import CavityProbeError, DivisionByZeroBaseline
from .experiment import ExperimentSetup

SweptParameter = Literal[
    "amplitude", "frequency", "cavity-length", "acceleration", "mode-index"
]


@dataclass(frozen=True)
class SensitivityPoint:
    epsilon: float
    gamma: float
    P_perturbed: float
    P_unperturbed: float
    S: float
    converged: bool = True
    error: Optional[str] = None


@dataclass(frozen=True)
class SensitivityCurve:
    swept_parameter: SweptParameter
    fixed_parameters: dict
    points: tuple


def sensitivity(P_perturbed: float, P_unperturbed: float) -> float:
    """Relative probability change |P_p - P_u| / P_u."""
    if P_unperturbed == 0:
        raise DivisionByZeroBaseline(
            "unperturbed transition probability is zero; the relative "
            "sensitivity estimator is undefined"
        )
    return abs(P_perturbed - P_unperturbed) / P_unperturbed


def _point(setup: ExperimentSetup, epsilon, gamma, baseline) -> SensitivityPoint:
    if epsilon == 0.0:
        # Same configuration as the shared baseline (the unperturbed
        # pipeline never reads gamma), so the estimator null S(0, gamma)=0
        # holds exactly, not just to tolerance.
        return SensitivityPoint(
            epsilon=0.0,
            gamma=gamma,
            P_perturbed=baseline.P,
            P_unperturbed=baseline.P,
            S=0.0,
            converged=baseline.converged,
        )
    try:
        r = setup.probability(epsilon, gamma)
        return SensitivityPoint(
            epsilon=epsilon,
            gamma=gamma,
            P_perturbed=r.P,
            P_unperturbed=baseline.P,
            S=sensitivity(r.P, baseline.P),
            converged=r.converged and baseline.converged,
        )
    except CavityProbeError as exc:
        # Long sweeps must stay inspectable; record the failure and go on.
        return SensitivityPoint(
            epsilon=epsilon,
            gamma=gamma,
            P_perturbed=float("nan"),
            P_unperturbed=baseline.P,
            S=float("nan"),
            converged=False,
            error=f"{type(exc).__name__}: {exc}",
        )


def _run_points(setup, pairs, baseline, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_point, setup, e, g, baseline) for e, g in pairs]
            return tuple(f.result() for f in futures)
    return tuple(_point(setup, e, g, baseline) for e, g in pairs)


def _check_grid(values, name):
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or len(values) < 1:
        raise CavityProbeError(f"{name} grid must be a nonempty 1-D sequence")
    if len(values) > 1 and not np.all(np.diff(values) > 0):
        raise CavityProbeError(f"{name} grid must be strictly increasing")
    return values


def baseline_probability(setup: ExperimentSetup):
    """The shared unperturbed response (epsilon = 0; gamma never read)."""
    return setup.probability(0.0, 0.0)


def amplitude_sweep(
    setup: ExperimentSetup,
    epsilon_grid: Sequence[float],
    gamma: float,
    threads: int = 1,
) -> SensitivityCurve:
    """S versus perturbation amplitude at fixed frequency."""
    grid = _check_grid(epsilon_grid, "epsilon")
    baseline = baseline_probability(setup)
    pairs = [(float(e), gamma) for e in grid]
    points = _run_points(setup, pairs, baseline, threads)
    fixed = setup.describe()
    fixed["gamma"] = gamma
    return SensitivityCurve("amplitude", fixed, points)


def frequency_spectrum(
    setup: ExperimentSetup,
    gamma_grid: Sequence[float],
    epsilon: float,
    threads: int = 1,
) -> SensitivityCurve:
    """S versus perturbation frequency at fixed amplitude."""
    grid = _check_grid(gamma_grid, "gamma")
    baseline = baseline_probability(setup)
    pairs = [(epsilon, float(g)) for g in grid]
    points = _run_points(setup, pairs, baseline, threads)
    fixed = setup.describe()
    fixed["epsilon"] = epsilon
    return SensitivityCurve("frequency", fixed, points)


def grid_sweep(
    setup: ExperimentSetup,
    epsilon_grid: Sequence[float],
    gamma_grid: Sequence[float],
    threads: int = 1,
) -> tuple:
    """Row-major (epsilon outer, gamma inner) table of sensitivity points."""
    e_grid = _check_grid(epsilon_grid, "epsilon")
    g_grid = _check_grid(gamma_grid, "gamma")
    baseline = baseline_probability(setup)
    pairs = [(float(e), float(g)) for e in e_grid for g in g_grid]
    return _run_points(setup, pairs, baseline, threads)
