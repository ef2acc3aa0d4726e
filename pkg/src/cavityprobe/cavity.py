"""Dirichlet cavity mode data: frequencies and stationary-wave profiles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class CavityConfig:
    """Cavity length plus mode-sum truncation policy.

    ``n_max`` caps the vacuum mode sum, ``n_min`` is the smallest mode
    count before convergence may be declared, and ``mode_tail_tol`` is the
    relative tail criterion used by the response assembly.
    """

    L: float
    n_max: int = 200
    n_min: int = 20
    mode_tail_tol: float = 1e-6

    def __post_init__(self):
        if self.L <= 0:
            raise ValidationError(f"cavity length must be positive, got L={self.L}")
        if not (1 <= self.n_min <= self.n_max):
            raise ValidationError(
                f"mode bounds must satisfy 1 <= n_min <= n_max, got "
                f"n_min={self.n_min}, n_max={self.n_max}"
            )
        if not (0 < self.mode_tail_tol < 1):
            raise ValidationError(
                f"mode_tail_tol must lie in (0, 1), got {self.mode_tail_tol}"
            )


def mode_frequency(n: int, L: float) -> float:
    """Angular frequency of the n-th stationary mode, n*pi/L.

    The wavenumber equals the frequency for every mode of the massless
    field, so no separate accessor exists.
    """
    if n < 1:
        raise ValidationError(f"mode index must be >= 1, got n={n}")
    if L <= 0:
        raise ValidationError(f"cavity length must be positive, got L={L}")
    return n * np.pi / L


def mode_profile(n: int, L: float, x) -> np.ndarray:
    """Spatial factor sin(n*pi*x/L), exactly zero at the walls.

    The argument is folded to a half-period before calling ``sin`` so the
    nulls at x = 0 and x = L hold bit-cleanly (x/L is exact at both walls),
    which the boundary-condition property tests rely on.
    """
    y = n * (np.asarray(x, dtype=float) / L)
    m = np.round(y)
    r = y - m
    sign = np.where(np.asarray(m) % 2 == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * r)


def mode_function(n: int, L: float, x, t) -> np.ndarray:
    """Stationary-wave mode exp(i*w_n*t) * sin(n*pi*x/L)."""
    w = mode_frequency(n, L)
    return np.exp(1j * w * np.asarray(t, dtype=float)) * mode_profile(n, L, x)
