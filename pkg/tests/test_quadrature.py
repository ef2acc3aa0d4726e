"""Quadrature machinery against analytic integrals."""

import numpy as np
import pytest

from cavityprobe.errors import NonConvergence
from cavityprobe.quadrature import (
    CumulativeIntegral,
    integrate_adaptive,
    oscillatory_integral,
    phase_partition,
)


def test_polynomial_exact():
    val, err = integrate_adaptive(lambda x: x**2, 0.0, 1.0, 1e-12)
    assert val == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert err < 1e-12


def test_oscillatory_against_analytic():
    omega = 37.0
    T = 2.0
    exact = (np.exp(1j * omega * T) - 1.0) / (1j * omega)
    val, err = oscillatory_integral(
        lambda u: np.exp(1j * omega * u), lambda u: np.full_like(u, omega), T, 1e-10
    )
    assert abs(val - exact) <= max(5 * err, 1e-12)
    assert abs(val - exact) / abs(exact) < 1e-10


def test_oscillatory_product_phase():
    # e^{i a u} sin(b u) has an elementary antiderivative.
    a, b, T = 11.0, 6.0, 1.5

    def analytic():
        up = 1j * (a + b)
        dn = 1j * (a - b)
        return ((np.exp(up * T) - 1) / up - (np.exp(dn * T) - 1) / dn) / 2j

    val, _ = oscillatory_integral(
        lambda u: np.exp(1j * a * u) * np.sin(b * u),
        lambda u: np.full_like(u, a + b),
        T,
        1e-10,
    )
    assert abs(val - analytic()) / abs(analytic()) < 1e-10


def test_cumulative_matches_antiderivative():
    F = CumulativeIntegral(np.cos, 10.0, rel_tol=1e-13)
    u = np.linspace(0.0, 10.0, 57)
    assert np.allclose(F(u), np.sin(u), rtol=0, atol=1e-12)


def test_cumulative_vector_valued():
    F = CumulativeIntegral(lambda u: np.stack([np.cos(u), np.sin(u)]), 5.0)
    u = np.array([0.0, 1.3, 5.0])
    out = F(u)
    assert np.allclose(out[0], np.sin(u), atol=1e-12)
    assert np.allclose(out[1], 1.0 - np.cos(u), atol=1e-12)


def test_cumulative_rejects_outside_domain():
    F = CumulativeIntegral(np.cos, 1.0)
    with pytest.raises(ValueError):
        F(np.array([1.5]))


def test_phase_partition_bounds_phase_per_panel():
    rate = lambda u: 3.0 + u  # noqa: E731
    edges = phase_partition(rate, 4.0)
    # Accumulated bound per panel stays below 2*pi/10 (trapezoid on edges).
    mids = 0.5 * (edges[1:] + edges[:-1])
    per_panel = rate(mids) * np.diff(edges)
    assert per_panel.max() <= 2 * np.pi / 10 * 1.05
    assert edges[0] == 0.0 and edges[-1] == 4.0


def test_unreachable_tolerance_raises():
    rng = np.random.default_rng(0)

    def noisy(x):
        return np.sin(x) + 1e-4 * rng.standard_normal(len(np.atleast_1d(x)))

    with pytest.raises(NonConvergence):
        integrate_adaptive(noisy, 0.0, 1.0, 1e-14, max_panels=64)
