"""Detector response: oscillatory mode integrals and transition probability.

For a worldline crossing the cavity in a parameter interval [0, T], the
per-mode integrals are

    proper frame: I(+/-, n) = int_0^T exp(i*(+/- Omega*tau + w_n*t(tau)))
                              * sin(k_n*x(tau)) dtau
    lab frame:    I(+/-, n) = int_0^T (dtau/dt)
                              * exp(i*(+/- Omega*tau(t) + w_n*t))
                              * sin(k_n*x(t)) dt

and the leading-order excitation probability is

    P = (lambda^2/L) * [ (alpha^2/k_j) * (|I(+,j)|^2 + |I(-,j)|^2)
                         + sum_n |I(+,n)|^2 ]

with the vacuum sum truncated adaptively.  The redshift factor dtau/dt in
the lab-frame integrand restores exact equality with the proper-frame
integral under a change of variables; ``drop_redshift=True`` drops it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .cavity import CavityConfig, mode_frequency, mode_profile
from .errors import InvalidProbability, ValidationError
from .quadrature import oscillatory_integral
from .worldline import LAB_FRAME, Worldline


@dataclass(frozen=True)
class DetectorConfig:
    """Proper energy gap and coupling strength of the two-level probe.

    coupling = 0 is allowed as the degenerate no-interaction limit
    (P is exactly zero there, by the quadratic scaling).
    """

    Omega: float
    coupling: float

    def __post_init__(self):
        if self.Omega <= 0:
            raise ValidationError(f"energy gap must be positive, got {self.Omega}")
        if self.coupling < 0:
            raise ValidationError(f"coupling must be nonnegative, got {self.coupling}")


@dataclass(frozen=True)
class FieldPreparation:
    """Coherent amplitude alpha in cavity mode j; all other modes in vacuum.

    alpha is restricted to real, nonnegative values: the probability formula
    only involves alpha^2.
    """

    mode_index: int = 1
    alpha: float = 0.0

    def __post_init__(self):
        if self.mode_index < 1:
            raise ValidationError(
                f"coherent mode index must be >= 1, got {self.mode_index}"
            )
        if self.alpha < 0:
            raise ValidationError(f"alpha must be nonnegative, got {self.alpha}")


@dataclass(frozen=True)
class ResponseResult:
    """Transition probability with per-mode diagnostics."""

    P: float
    coherent_part: float
    vacuum_part: float
    # (n, |I+,n|^2, |I-,n|^2); the counter-rotating entry is only computed
    # for the coherent mode and reported as 0.0 elsewhere.
    mode_contributions: tuple = field(repr=False)
    N_used: int = 0
    converged: bool = True
    quad_error_estimate: float = 0.0


def response_integral(
    w: Worldline,
    d: DetectorConfig,
    c: CavityConfig,
    n: int,
    sign: int,
    tol: float = 1e-8,
    drop_redshift: bool = False,
) -> complex:
    """Certified oscillatory response integral for one mode and sign."""
    value, _ = response_integral_with_error(w, d, c, n, sign, tol, drop_redshift)
    return value


def response_integral_with_error(
    w: Worldline,
    d: DetectorConfig,
    c: CavityConfig,
    n: int,
    sign: int,
    tol: float = 1e-8,
    drop_redshift: bool = False,
):
    if sign not in (+1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {sign}")
    _check_cavity(w, c)
    omega_n = mode_frequency(n, c.L)
    drop_redshift = drop_redshift and w.scenario == LAB_FRAME

    def g(u):
        x, t, tau, dtau = w.kinematics(u)
        phase = sign * d.Omega * tau + omega_n * t
        amp = mode_profile(n, c.L, x)
        if not drop_redshift:
            amp = dtau * amp
        return np.exp(1j * phase) * amp

    return oscillatory_integral(
        g,
        lambda u: w.phase_rate_bound(u, d.Omega, omega_n),
        w.T,
        tol,
    )


def brute_force_response_integral(
    w: Worldline,
    d: DetectorConfig,
    c: CavityConfig,
    n: int,
    sign: int,
    num_nodes: int,
    drop_redshift: bool = False,
) -> complex:
    """Midpoint Riemann sum oracle on a uniform grid.

    Intentionally naive; shares nothing with the adaptive integrator
    except worldline evaluation.
    """
    if num_nodes < 10_000:
        raise ValidationError(f"oracle needs num_nodes >= 1e4, got {num_nodes}")
    _check_cavity(w, c)
    omega_n = mode_frequency(n, c.L)
    h = w.T / num_nodes
    u = (np.arange(num_nodes) + 0.5) * h
    x, t, tau, dtau = w.kinematics(u)
    vals = np.exp(1j * (sign * d.Omega * tau + omega_n * t)) * np.sin(omega_n * x)
    if not (drop_redshift and w.scenario == LAB_FRAME):
        vals = vals * dtau
    return complex(h * vals.sum())


def transition_probability(
    w: Worldline,
    d: DetectorConfig,
    c: CavityConfig,
    f: FieldPreparation,
    tol: float = 1e-8,
    drop_redshift: bool = False,
) -> ResponseResult:
    """Assemble the transition probability with adaptive mode truncation.

    The vacuum sum stops at the smallest N >= n_min for which the last 10
    modes contribute less than ``c.mode_tail_tol`` of the running total
    (coherent part included); if n_max is reached first the result is
    returned with ``converged=False``, never silently capped.
    """
    _check_cavity(w, c)
    if f.mode_index > c.n_max:
        raise ValidationError(
            f"coherent mode j={f.mode_index} exceeds the cavity mode cap "
            f"n_max={c.n_max}"
        )
    if d.coupling == 0:
        # No interaction: P = 0 exactly, nothing to sum.
        return ResponseResult(
            P=0.0, coherent_part=0.0, vacuum_part=0.0, mode_contributions=()
        )
    lam2_L = d.coupling**2 / c.L

    coherent = 0.0
    err_coh = 0.0
    minus_sq_j = 0.0
    if f.alpha > 0:
        k_j = mode_frequency(f.mode_index, c.L)
        ip, ep = response_integral_with_error(
            w, d, c, f.mode_index, +1, tol, drop_redshift
        )
        im, em = response_integral_with_error(
            w, d, c, f.mode_index, -1, tol, drop_redshift
        )
        minus_sq_j = abs(im) ** 2
        coherent = lam2_L * (f.alpha**2 / k_j) * (abs(ip) ** 2 + minus_sq_j)
        err_coh = lam2_L * (f.alpha**2 / k_j) * 2 * (abs(ip) * ep + abs(im) * em)

    contributions = []
    plus_sq = []
    quad_err = err_coh
    converged = False
    n_used = 0
    for n in range(1, c.n_max + 1):
        val, err = response_integral_with_error(w, d, c, n, +1, tol, drop_redshift)
        sq = abs(val) ** 2
        plus_sq.append(sq)
        quad_err += lam2_L * 2 * abs(val) * err
        contributions.append((n, sq, minus_sq_j if n == f.mode_index else 0.0))
        n_used = n
        if n >= c.n_min and n >= 10:
            running = coherent + lam2_L * sum(plus_sq)
            tail = lam2_L * sum(plus_sq[-10:])
            if tail < c.mode_tail_tol * running:
                converged = True
                break

    vacuum = lam2_L * sum(plus_sq)
    P = coherent + vacuum
    if P > 0.1:
        warnings.warn(
            f"P = {P:.3g} > 0.1: leading-order perturbation theory is "
            f"questionable for this configuration",
            stacklevel=2,
        )
    return ResponseResult(
        P=P,
        coherent_part=coherent,
        vacuum_part=vacuum,
        mode_contributions=tuple(contributions),
        N_used=n_used,
        converged=converged,
        quad_error_estimate=quad_err,
    )


def detector_density_matrix(r: ResponseResult) -> np.ndarray:
    """Post-crossing detector state diag(1-P, P)."""
    if not (0.0 <= r.P <= 1.0):
        raise InvalidProbability(
            f"P = {r.P:g} outside [0, 1]: perturbative expansion broke down"
        )
    return np.diag([1.0 - r.P, r.P])


def _check_cavity(w: Worldline, c: CavityConfig):
    if abs(w.cavity_length - c.L) > 1e-12 * c.L:
        raise ValidationError(
            f"worldline was built for cavity length {w.cavity_length:g}, "
            f"config has L={c.L:g}"
        )


__all__ = [
    "DetectorConfig",
    "FieldPreparation",
    "ResponseResult",
    "response_integral",
    "response_integral_with_error",
    "brute_force_response_integral",
    "transition_probability",
    "detector_density_matrix",
]
