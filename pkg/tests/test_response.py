"""Response integrals and transition probability assembly."""

import numpy as np
import pytest

from cavityprobe import (
    CavityConfig,
    DetectorConfig,
    FieldPreparation,
    LabFramePerturbation,
    LabFrameWorldline,
    ProperFramePerturbation,
    ProperFrameWorldline,
    brute_force_response_integral,
    detector_density_matrix,
    response_integral,
    transition_probability,
)
from cavityprobe.errors import InvalidProbability, ValidationError
from cavityprobe.response import ResponseResult

from conftest import make_setup


@pytest.fixture(scope="module")
def cavity():
    return CavityConfig(L=1.0, n_max=12, n_min=5, mode_tail_tol=1e-4)


@pytest.fixture(scope="module")
def det():
    return DetectorConfig(Omega=5.0, coupling=0.01)


@pytest.fixture(scope="module")
def w_proper():
    return ProperFrameWorldline(ProperFramePerturbation(a0=1.0), 1.0)


class TestResponseIntegral:
    def test_against_riemann_oracle_unperturbed(self, w_proper, det, cavity):
        fast = response_integral(w_proper, det, cavity, 1, +1, 1e-9)
        slow = brute_force_response_integral(w_proper, det, cavity, 1, +1, 1_000_000)
        assert abs(fast - slow) / abs(fast) < 1e-6

    def test_against_riemann_oracle_perturbed(self, det, cavity):
        w = ProperFrameWorldline(
            ProperFramePerturbation(a0=1.0, epsilon=0.05, gamma=2.0), 1.0
        )
        for sign in (+1, -1):
            fast = response_integral(w, det, cavity, 7, sign, 1e-9)
            slow = brute_force_response_integral(w, det, cavity, 7, sign, 1_000_000)
            assert abs(fast - slow) / abs(fast) < 1e-6

    def test_lab_frame_against_oracle(self, det, cavity):
        w = LabFrameWorldline(
            LabFramePerturbation(a=1.0, epsilon=0.01, gamma=2.0), 1.0
        )
        fast = response_integral(w, det, cavity, 5, +1, 1e-9)
        slow = brute_force_response_integral(w, det, cavity, 5, +1, 1_000_000)
        assert abs(fast - slow) / abs(fast) < 1e-6

    def test_vanishing_domain(self, det):
        tiny = CavityConfig(L=1e-6, n_max=12, n_min=5)
        w = ProperFrameWorldline(ProperFramePerturbation(a0=1.0), 1e-6)
        val = response_integral(w, det, tiny, 1, +1, 1e-8)
        assert abs(val) <= w.T

    def test_cross_frame_change_of_variables(self, det, cavity):
        # Same physical curve described in either frame gives the same
        # integral once the redshift factor is included.
        wp = ProperFrameWorldline(ProperFramePerturbation(a0=1.0), 1.0)
        wl = LabFrameWorldline(LabFramePerturbation(a=1.0), 1.0)
        for n, sign in [(1, +1), (3, +1), (2, -1)]:
            ip = response_integral(wp, det, cavity, n, sign, 1e-9)
            il = response_integral(wl, det, cavity, n, sign, 1e-9)
            assert abs(ip - il) <= 2e-9 + 2e-9 * abs(ip)

    def test_drop_redshift_option(self, det, cavity):
        wl = LabFrameWorldline(LabFramePerturbation(a=1.0), 1.0)
        with_factor = response_integral(wl, det, cavity, 1, +1, 1e-9)
        dropped = response_integral(wl, det, cavity, 1, +1, 1e-9, drop_redshift=True)
        assert abs(with_factor - dropped) > 1e-3  # genuinely different integrals
        brute_dropped = brute_force_response_integral(
            wl, det, cavity, 1, +1, 200_000, drop_redshift=True
        )
        assert abs(dropped - brute_dropped) / abs(dropped) < 1e-5

    def test_cavity_mismatch_rejected(self, w_proper, det):
        with pytest.raises(ValidationError):
            response_integral(w_proper, det, CavityConfig(L=2.0), 1, +1)


class TestBruteForce:
    def test_node_floor(self, w_proper, det, cavity):
        with pytest.raises(ValidationError):
            brute_force_response_integral(w_proper, det, cavity, 1, +1, 100)

    def test_second_order_convergence(self, w_proper, det, cavity):
        vals = [
            brute_force_response_integral(w_proper, det, cavity, 3, +1, m)
            for m in (50_000, 100_000, 200_000)
        ]
        d1 = abs(vals[1] - vals[0])
        d2 = abs(vals[2] - vals[1])
        assert d2 == pytest.approx(d1 / 4, rel=0.2)

    def test_uniform_velocity_analytic(self, cavity):
        # a0 -> 0 with xi0 > 0: straight line x = sinh(xi0) tau,
        # t = cosh(xi0) tau; with Omega ~ 0 the integral is elementary.
        xi0 = 0.5
        p = ProperFramePerturbation(a0=1e-8, xi0=xi0)
        T = 1.0 / np.sinh(xi0)  # crosses x = 1
        w = ProperFrameWorldline(p, 1.0)
        assert w.T == pytest.approx(T, rel=1e-6)
        det0 = DetectorConfig(Omega=1e-9, coupling=0.01)
        val = brute_force_response_integral(w, det0, cavity, 1, +1, 200_000)
        a = np.pi * np.cosh(xi0)  # omega_1 * dt/dtau
        b = np.pi * np.sinh(xi0)  # k_1 * dx/dtau
        up, dn = 1j * (a + b), 1j * (a - b)
        exact = ((np.exp(up * w.T) - 1) / up - (np.exp(dn * w.T) - 1) / dn) / 2j
        assert abs(val - exact) / abs(exact) < 1e-5


class TestTransitionProbability:
    def test_coupling_scaling(self, w_proper, cavity):
        f = FieldPreparation(mode_index=1, alpha=2.0)
        d1 = DetectorConfig(Omega=5.0, coupling=0.01)
        d2 = DetectorConfig(Omega=5.0, coupling=0.02)
        r1 = transition_probability(w_proper, d1, cavity, f, 1e-8)
        r2 = transition_probability(w_proper, d2, cavity, f, 1e-8)
        assert r2.P == pytest.approx(4 * r1.P, rel=1e-14)

    def test_zero_coupling_exact_zero(self, w_proper, cavity):
        d0 = DetectorConfig(Omega=5.0, coupling=0.0)
        r = transition_probability(w_proper, d0, cavity, FieldPreparation(), 1e-8)
        assert r.P == 0.0
        assert r.converged

    def test_coherent_part_affine_in_alpha_squared(self, w_proper, det, cavity):
        rs = {
            a: transition_probability(
                w_proper, det, cavity, FieldPreparation(mode_index=1, alpha=a), 1e-8
            )
            for a in (0.0, 2.0, 3.0)
        }
        gain = (rs[2.0].P - rs[0.0].P) / 4.0  # per unit alpha^2
        assert rs[3.0].P == pytest.approx(rs[0.0].P + 9 * gain, rel=1e-12)
        assert rs[2.0].coherent_part == pytest.approx(rs[2.0].P - rs[0.0].P, rel=1e-12)

    def test_parts_sum_and_positivity(self, w_proper, det, cavity):
        r = transition_probability(
            w_proper, det, cavity, FieldPreparation(mode_index=2, alpha=1.5), 1e-8
        )
        assert r.P == pytest.approx(r.coherent_part + r.vacuum_part, rel=1e-14)
        assert r.P >= 0
        assert all(c[1] >= 0 and c[2] >= 0 for c in r.mode_contributions)

    def test_partial_sums_nondecreasing(self, w_proper, det, cavity):
        r = transition_probability(w_proper, det, cavity, FieldPreparation(), 1e-8)
        partial = np.cumsum([c[1] for c in r.mode_contributions])
        assert np.all(np.diff(partial) >= 0)

    def test_mode_cap_reported_not_silent(self, w_proper, det):
        strict = CavityConfig(L=1.0, n_max=12, n_min=5, mode_tail_tol=1e-12)
        r = transition_probability(w_proper, det, strict, FieldPreparation(), 1e-8)
        assert not r.converged
        assert r.N_used == 12

    def test_tolerance_coherence(self, w_proper, det, cavity):
        f = FieldPreparation(mode_index=1, alpha=5.0)
        p6 = transition_probability(w_proper, det, cavity, f, 1e-6).P
        p7 = transition_probability(w_proper, det, cavity, f, 1e-7).P
        assert abs(p6 - p7) / p7 < 1e-6

    def test_coherent_mode_out_of_range(self, w_proper, det, cavity):
        with pytest.raises(ValidationError):
            transition_probability(
                w_proper, det, cavity, FieldPreparation(mode_index=13, alpha=1.0)
            )

    def test_t0_offset_invariance(self, det, cavity):
        f = FieldPreparation(mode_index=1, alpha=5.0)
        r0 = transition_probability(
            ProperFrameWorldline(ProperFramePerturbation(a0=1.0), 1.0),
            det, cavity, f, 1e-9,
        )
        r1 = transition_probability(
            ProperFrameWorldline(ProperFramePerturbation(a0=1.0, t0=0.7), 1.0),
            det, cavity, f, 1e-9,
        )
        assert abs(r0.P - r1.P) / r0.P < 1e-8

    def test_proper_time_offset_invariance(self, det, cavity):
        f = FieldPreparation(mode_index=1, alpha=5.0)
        base = ProperFrameWorldline(ProperFramePerturbation(a0=1.0), 1.0)
        shifted = _TauShifted(base, 0.9)
        r0 = transition_probability(base, det, cavity, f, 1e-9)
        r1 = transition_probability(shifted, det, cavity, f, 1e-9)
        assert abs(r0.P - r1.P) / r0.P < 1e-8


class _TauShifted:
    """Worldline adapter adding a constant to the proper-time map."""

    def __init__(self, base, offset):
        self.base = base
        self.offset = offset
        self.scenario = base.scenario
        self.T = base.T
        self.cavity_length = base.cavity_length
        self.eval_tol = base.eval_tol

    def kinematics(self, u):
        x, t, tau, dtau = self.base.kinematics(u)
        return x, t, tau + self.offset, dtau

    def mode_rate_part(self, u):
        return self.base.mode_rate_part(u)

    def phase_rate_bound(self, u, Omega, omega_n):
        return self.base.phase_rate_bound(u, Omega, omega_n)

    def speed(self, u):
        return self.base.speed(u)


class TestDensityMatrix:
    def test_values(self):
        r = ResponseResult(
            P=0.25, coherent_part=0.2, vacuum_part=0.05, mode_contributions=()
        )
        rho = detector_density_matrix(r)
        assert np.allclose(rho, np.diag([0.75, 0.25]))
        assert np.trace(rho) == 1.0

    def test_ground_state_preserved(self):
        r = ResponseResult(P=0.0, coherent_part=0.0, vacuum_part=0.0, mode_contributions=())
        assert np.allclose(detector_density_matrix(r), np.diag([1.0, 0.0]))

    def test_invalid_probability(self):
        r = ResponseResult(P=1.5, coherent_part=1.5, vacuum_part=0.0, mode_contributions=())
        with pytest.raises(InvalidProbability):
            detector_density_matrix(r)


def test_perturbative_breakdown_warns():
    setup = make_setup(a0=1.0)
    import dataclasses
    loud = dataclasses.replace(
        setup,
        detector=DetectorConfig(Omega=7.0, coupling=5.0),
        field=FieldPreparation(mode_index=1, alpha=10.0),
    )
    with pytest.warns(UserWarning, match="perturbation theory"):
        loud.probability(0.0, 0.0)
