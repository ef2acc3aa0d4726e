"""Detector worldlines for both probe scenarios.

Scenario "proper-frame": the probe's proper acceleration carries a small
harmonic ripple, a(tau) = a0 * (1 + eps*sin(gamma*tau)).  The rapidity has
a closed form; the lab coordinates are certified cumulative integrals of
sinh/cosh of it.

Scenario "lab-frame": the probe's lab trajectory is the hyperbola of
constant acceleration plus a harmonic displacement, x(t) = (sqrt(1+a^2 t^2)
- 1)/a + eps*sin(gamma*t).  Proper time along it is either the first-order
closed form (normalized so tau(0) = 0) or an exact numeric integral of
sqrt(1 - v^2).

Everything here is a pure function of immutable inputs; worldline objects
cache quadrature panels at construction and are read-only afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from .errors import (
    BracketFailure,
    CausalityViolation,
    NonMonotonic,
    ValidationError,
)
from .quadrature import CumulativeIntegral, integrate_adaptive

PROPER_FRAME = "proper-frame"
LAB_FRAME = "lab-frame"
Scenario = Literal["proper-frame", "lab-frame"]

TauMode = Literal["linearized", "exact-numeric"]

DEFAULT_ROOT_TOL = 1e-12
DEFAULT_EVAL_TOL = 1e-12
_MAX_BRACKET_DOUBLINGS = 200
_CAUSALITY_MARGIN = 1e-9


@dataclass(frozen=True)
class ProperFramePerturbation:
    """Kinematic parameters of the proper-acceleration scenario.

    All quantities are in natural units (c = 1): ``a0`` and ``gamma`` carry
    dimension 1/length, ``epsilon`` and ``xi0`` are dimensionless, ``x0``
    and ``t0`` are lengths.
    """

    a0: float
    epsilon: float = 0.0
    gamma: float = 0.0
    xi0: float = 0.0
    x0: float = 0.0
    t0: float = 0.0

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValidationError(f"a0 must be positive, got {self.a0}")
        if not (0 <= self.epsilon < 1):
            raise ValidationError(
                f"relative amplitude must satisfy 0 <= epsilon < 1 so the "
                f"proper acceleration stays positive, got {self.epsilon}"
            )
        if self.epsilon > 0 and self.gamma <= 0:
            raise ValidationError(
                f"gamma must be positive when epsilon > 0, got {self.gamma}"
            )


@dataclass(frozen=True)
class LabFramePerturbation:
    """Kinematic parameters of the alignment scenario.

    ``epsilon`` is an absolute displacement (length); ``gamma`` is the
    perturbation frequency in lab time.  ``epsilon * gamma`` is the speed
    the perturbation alone contributes at t = 0 and must stay below 1.
    """

    a: float
    epsilon: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.a <= 0:
            raise ValidationError(f"a must be positive, got {self.a}")
        if self.epsilon < 0:
            raise ValidationError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.epsilon > 0 and self.gamma <= 0:
            raise ValidationError(
                f"gamma must be positive when epsilon > 0, got {self.gamma}"
            )
        if self.epsilon * self.gamma >= 1:
            raise ValidationError(
                f"epsilon*gamma = {self.epsilon * self.gamma:g} >= 1: the "
                f"perturbation alone is superluminal at t=0"
            )


# ---------------------------------------------------------------------------
# proper-frame scenario


def rapidity(p: ProperFramePerturbation, tau) -> np.ndarray:
    """Rapidity xi(tau): closed-form integral of the perturbed acceleration.

    xi = xi0 + a0*tau + (a0*eps/gamma)*(1 - cos(gamma*tau)); the harmonic
    term is integrated analytically, never numerically.
    """
    tau = np.asarray(tau, dtype=float)
    out = p.xi0 + p.a0 * tau
    if p.epsilon > 0:
        out = out + (p.a0 * p.epsilon / p.gamma) * (1.0 - np.cos(p.gamma * tau))
    return out


def proper_acceleration(p: ProperFramePerturbation, tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if p.epsilon == 0:
        return np.full_like(tau, p.a0)
    return p.a0 * (1.0 + p.epsilon * np.sin(p.gamma * tau))


def _hyperbolic_pair(p: ProperFramePerturbation):
    """Integrand (cosh xi, sinh xi) stacked for the coordinate integrals."""

    def f(tau):
        e = np.exp(rapidity(p, tau))
        inv = 1.0 / e
        return np.stack([0.5 * (e + inv), 0.5 * (e - inv)])

    return f


def _proper_initial_edges(p: ProperFramePerturbation, span: float) -> np.ndarray:
    # Resolve both the rapidity ramp (panel width ~ 0.25 rapidity) and the
    # harmonic ripple (>= 8 panels per period).
    n = max(16, int(np.ceil(span * p.a0 * (1 + p.epsilon) / 0.25)))
    if p.epsilon > 0:
        n = max(n, int(np.ceil(8 * span * p.gamma / (2 * np.pi))))
    return np.linspace(0.0, span, min(n, 200_000) + 1)


def proper_worldline(p: ProperFramePerturbation, tau: float, tol: float = 1e-12):
    """Lab coordinates (x, t) of the proper-frame trajectory at ``tau``.

    Adaptive quadrature of (sinh xi, cosh xi) certified to relative error
    ``tol``.  Raises NonConvergence if the panel budget is exhausted.
    """
    if tau < 0:
        raise ValidationError(f"tau must be nonnegative, got {tau}")
    if tau == 0:
        return p.x0, p.t0
    vals, _ = integrate_adaptive(
        _hyperbolic_pair(p),
        0.0,
        float(tau),
        tol,
        initial_edges=_proper_initial_edges(p, float(tau)),
        abs_floor=tol * 1e-3 * float(tau),
    )
    return p.x0 + float(vals[1]), p.t0 + float(vals[0])


def crossing_time_proper(
    p: ProperFramePerturbation, L: float, tol: float = DEFAULT_ROOT_TOL
) -> float:
    """Proper time at which the trajectory reaches x = L.

    Brackets by doubling an initial guess taken from the unperturbed
    closed form, then refines with Brent's method.  The probe accelerates
    rightward throughout, so the crossing of L > 0 is unique.
    """
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L}")
    if p.x0 != 0:
        raise ValidationError("crossing time assumes entry at the left wall x0=0")
    quad_tol = min(tol, 1e-12)

    def overshoot(tau):
        x, _ = proper_worldline(p, tau, quad_tol)
        return x - L

    t_hi = np.arccosh(1.0 + p.a0 * L / np.cosh(p.xi0)) / p.a0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if overshoot(t_hi) >= 0:
            break
        t_hi *= 2.0
    else:
        raise BracketFailure(
            f"x(tau) never reached L={L:g} within {_MAX_BRACKET_DOUBLINGS} doublings"
        )
    T = brentq(overshoot, 0.0, t_hi, xtol=tol * t_hi, rtol=max(tol, 4e-16))
    x_T, _ = proper_worldline(p, T, quad_tol)
    if abs(x_T - L) > max(tol, 1e-10) * L:
        raise BracketFailure(
            f"crossing refinement left |x(T)-L| = {abs(x_T - L):.3e} above tolerance"
        )
    return float(T)


# ---------------------------------------------------------------------------
# lab-frame scenario


def lab_position(p: LabFramePerturbation, t) -> np.ndarray:
    """x(t) = (sqrt(1 + a^2 t^2) - 1)/a + eps*sin(gamma*t)."""
    t = np.asarray(t, dtype=float)
    base = (np.sqrt(1.0 + (p.a * t) ** 2) - 1.0) / p.a
    if p.epsilon == 0:
        return base
    return base + p.epsilon * np.sin(p.gamma * t)


def lab_speed(p: LabFramePerturbation, t) -> np.ndarray:
    """dx/dt = a t / sqrt(1 + a^2 t^2) + eps*gamma*cos(gamma*t)."""
    t = np.asarray(t, dtype=float)
    base = p.a * t / np.sqrt(1.0 + (p.a * t) ** 2)
    if p.epsilon == 0:
        return base
    return base + p.epsilon * p.gamma * np.cos(p.gamma * t)


def _lab_tau_linearized(p: LabFramePerturbation, t):
    t = np.asarray(t, dtype=float)
    base = np.arcsinh(p.a * t) / p.a
    if p.epsilon == 0:
        return base
    # First order in epsilon, plus the constant a*eps/gamma that anchors
    # tau(0) = 0 (a constant offset is physically inert: it multiplies each
    # response integral by a unit-modulus phase).
    osc = (
        p.a
        * p.epsilon
        * (np.cos(p.gamma * t) + p.gamma * t * np.sin(p.gamma * t))
        / p.gamma
    )
    return base - osc + p.a * p.epsilon / p.gamma


def _lab_dtau_linearized(p: LabFramePerturbation, t):
    t = np.asarray(t, dtype=float)
    base = 1.0 / np.sqrt(1.0 + (p.a * t) ** 2)
    if p.epsilon == 0:
        return base
    return base - p.a * p.epsilon * p.gamma * t * np.cos(p.gamma * t)


def _lab_dtau_exact(p: LabFramePerturbation, t):
    v = lab_speed(p, t)
    arg = 1.0 - v * v
    if np.any(arg <= 0):
        worst = float(np.max(np.abs(v)))
        raise CausalityViolation(
            f"lab-frame speed reached |dx/dt| = {worst:g} >= 1"
        )
    return np.sqrt(arg)


def lab_proper_time(
    p: LabFramePerturbation,
    t: float,
    mode: TauMode = "linearized",
    tol: float = 1e-12,
) -> float:
    """Elapsed proper time tau(t) along the lab-frame trajectory.

    "linearized" evaluates the first-order closed form (normalized so
    tau(0) = 0); "exact-numeric" integrates sqrt(1 - (dx/dt)^2)
    adaptively and is the oracle the linearized branch is tested against.
    """
    if t < 0:
        raise ValidationError(f"t must be nonnegative, got {t}")
    if t == 0:
        return 0.0
    if mode == "linearized":
        return float(_lab_tau_linearized(p, t))
    if mode != "exact-numeric":
        raise ValidationError(f"unknown proper-time mode: {mode!r}")
    edges = _lab_initial_edges(p, float(t))
    vals, _ = integrate_adaptive(
        lambda s: _lab_dtau_exact(p, s),
        0.0,
        float(t),
        tol,
        initial_edges=edges,
        abs_floor=tol * 1e-3 * float(t),
    )
    return float(vals)


def _lab_initial_edges(p: LabFramePerturbation, span: float) -> np.ndarray:
    n = max(16, int(np.ceil(span * p.a / 0.25)))
    if p.epsilon > 0:
        n = max(n, int(np.ceil(8 * span * p.gamma / (2 * np.pi))))
    return np.linspace(0.0, span, min(n, 200_000) + 1)


def validate_timelike(p: LabFramePerturbation, T: float) -> float:
    """Maximum |dx/dt| on a dense grid over [0, T].

    Pure evaluation: thresholding against 1 is the caller's contract.  The
    grid carries at least 64 samples per perturbation period and per unit
    of a*t so both the oscillation and the relativistic ramp are resolved.
    """
    if T <= 0:
        raise ValidationError(f"T must be positive, got {T}")
    n = 257
    n = max(n, 64 * int(np.ceil(p.a * T)) + 1)
    if p.epsilon > 0 and p.gamma > 0:
        n = max(n, 64 * int(np.ceil(p.gamma * T / (2 * np.pi))) + 1)
    grid = np.linspace(0.0, T, min(n, 2_000_001))
    return float(np.max(np.abs(lab_speed(p, grid))))


def crossing_time_lab(
    p: LabFramePerturbation, L: float, tol: float = DEFAULT_ROOT_TOL
) -> float:
    """Smallest lab time with x(T) = L.

    Marches forward in steps small against both the perturbation period
    and the unperturbed crossing time, refines the first sign change with
    Brent's method, and raises NonMonotonic only when the position
    backtracks inside the refinement bracket even after shrinking it (a
    grazing crossing, where "the first root" is ill-conditioned).  The
    perturbation may briefly move the probe backwards early in the flight;
    that does not affect the first L-crossing and is accepted.
    """
    if L <= 0:
        raise ValidationError(f"L must be positive, got {L}")
    t_unpert = np.sqrt((1.0 + p.a * L) ** 2 - 1.0) / p.a
    step = t_unpert / 16.0
    if p.epsilon > 0 and p.gamma > 0:
        step = min(step, 2 * np.pi / p.gamma / 8.0)
    t_lo, t_hi = _first_crossing_bracket(p, L, step)

    for _ in range(8):  # bracket-shrinking retries
        v = lab_speed(p, np.linspace(t_lo, t_hi, 65))
        if np.all(v > 0):
            T = brentq(
                lambda t: float(lab_position(p, t)) - L,
                t_lo,
                t_hi,
                xtol=tol * max(t_hi, 1.0),
                rtol=max(tol, 4e-16),
            )
            if abs(float(lab_position(p, T)) - L) > max(tol, 1e-10) * L:
                raise BracketFailure("lab crossing refinement missed tolerance")
            return float(T)
        # Position backtracks inside the bracket; shrink around the first
        # sub-grid crossing and retry.
        grid = np.linspace(t_lo, t_hi, 257)
        xs = lab_position(p, grid)
        above = np.nonzero(xs >= L)[0]
        if len(above) == 0 or above[0] == 0:
            raise BracketFailure("crossing bracket degenerated while shrinking")
        t_lo, t_hi = grid[above[0] - 1], grid[above[0]]
    raise NonMonotonic(
        f"dx/dt <= 0 inside the crossing bracket for eps={p.epsilon:g}, "
        f"gamma={p.gamma:g}: first crossing of L={L:g} is not isolated"
    )


def _first_crossing_bracket(p: LabFramePerturbation, L: float, step: float):
    block = 4096
    start = 0.0
    for _ in range(1024):
        grid = start + step * np.arange(1, block + 1)
        hit = np.nonzero(lab_position(p, grid) >= L)[0]
        if len(hit):
            k = hit[0]
            lo = grid[k - 1] if k > 0 else start
            return float(lo), float(grid[k])
        start = float(grid[-1])
    raise BracketFailure(
        f"x(t) never reached L={L:g} within {1024 * block} march steps of {step:g}"
    )


# ---------------------------------------------------------------------------
# worldline objects consumed by the response integrals


class Worldline:
    """Common surface of both trajectory kinds.

    ``kinematics(u)`` maps the worldline parameter (proper time for the
    proper-frame scenario, lab time otherwise) to ``(x, t, tau, dtau_du)``
    arrays; ``phase_rate_bound(u, Omega, omega_n)`` bounds the local
    angular rate of the response integrand for panel sizing.  The bound
    always has the form Omega + omega_n * mode_rate_part(u), which batch
    evaluators exploit to share one rate table across all modes.
    """

    scenario: Scenario
    T: float
    cavity_length: float
    eval_tol: float

    def kinematics(self, u):
        raise NotImplementedError

    def mode_rate_part(self, u):
        raise NotImplementedError

    def phase_rate_bound(self, u, Omega: float, omega_n: float):
        return Omega + omega_n * self.mode_rate_part(u)

    def speed(self, u):
        raise NotImplementedError


class ProperFrameWorldline(Worldline):
    """Proper-frame trajectory with a cached coordinate quadrature."""

    scenario = PROPER_FRAME

    def __init__(
        self,
        params: ProperFramePerturbation,
        cavity_length: float,
        eval_tol: float = DEFAULT_EVAL_TOL,
        root_tol: float = DEFAULT_ROOT_TOL,
    ):
        self.params = params
        self.cavity_length = float(cavity_length)
        self.eval_tol = float(eval_tol)
        self.T = crossing_time_proper(params, cavity_length, root_tol)
        self._coords = CumulativeIntegral(
            _hyperbolic_pair(params),
            self.T,
            rel_tol=min(eval_tol, 1e-12),
            initial_edges=_proper_initial_edges(params, self.T),
        )

    def kinematics(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        pair = self._coords(u)
        x = self.params.x0 + pair[1]
        t = self.params.t0 + pair[0]
        return x, t, u, np.ones_like(u)

    def speed(self, u):
        return np.tanh(rapidity(self.params, u))

    def mode_rate_part(self, u):
        xi = rapidity(self.params, np.asarray(u, dtype=float))
        return np.cosh(xi) + np.abs(np.sinh(xi))


class LabFrameWorldline(Worldline):
    """Lab-frame trajectory; closed-form coordinates, configurable tau map."""

    scenario = LAB_FRAME

    def __init__(
        self,
        params: LabFramePerturbation,
        cavity_length: float,
        eval_tol: float = DEFAULT_EVAL_TOL,
        root_tol: float = DEFAULT_ROOT_TOL,
        tau_mode: TauMode = "linearized",
    ):
        if tau_mode not in ("linearized", "exact-numeric"):
            raise ValidationError(f"unknown proper-time mode: {tau_mode!r}")
        self.params = params
        self.cavity_length = float(cavity_length)
        self.eval_tol = float(eval_tol)
        self.tau_mode = tau_mode
        self.T = crossing_time_lab(params, cavity_length, root_tol)
        vmax = validate_timelike(params, self.T)
        if vmax >= 1.0 - _CAUSALITY_MARGIN:
            raise CausalityViolation(
                f"max |dx/dt| = {vmax:g} on [0, T]; trajectory is not timelike"
            )
        if tau_mode == "exact-numeric":
            self._tau = CumulativeIntegral(
                lambda t: _lab_dtau_exact(params, t)[None, :],
                self.T,
                rel_tol=min(eval_tol, 1e-12),
                initial_edges=_lab_initial_edges(params, self.T),
            )
        else:
            self._tau = None
            dtau = _lab_dtau_linearized(params, np.linspace(0.0, self.T, 4097))
            if np.any(dtau <= 0):
                raise CausalityViolation(
                    "linearized dtau/dt <= 0 on [0, T]: the first-order "
                    "proper-time map breaks down for these eps, gamma"
                )

    def kinematics(self, u):
        u = np.atleast_1d(np.asarray(u, dtype=float))
        x = lab_position(self.params, u)
        if self.tau_mode == "linearized":
            tau = _lab_tau_linearized(self.params, u)
            dtau = _lab_dtau_linearized(self.params, u)
        else:
            tau = self._tau(u)[0]
            dtau = _lab_dtau_exact(self.params, u)
        return x, u, tau, dtau

    def speed(self, u):
        return lab_speed(self.params, u)

    def mode_rate_part(self, u):
        return 1.0 + np.abs(lab_speed(self.params, np.asarray(u, dtype=float)))


def make_worldline(
    params,
    cavity_length: float,
    eval_tol: float = DEFAULT_EVAL_TOL,
    root_tol: float = DEFAULT_ROOT_TOL,
    tau_mode: TauMode = "linearized",
) -> Worldline:
    """Construct the worldline matching the parameter type."""
    if isinstance(params, ProperFramePerturbation):
        return ProperFrameWorldline(params, cavity_length, eval_tol, root_tol)
    if isinstance(params, LabFramePerturbation):
        return LabFrameWorldline(params, cavity_length, eval_tol, root_tol, tau_mode)
    raise ValidationError(f"unsupported perturbation type: {type(params).__name__}")
