"""Inverse estimation: forward-model batching, synthesis, and fitting."""

import numpy as np
import pytest
from sklearn.base import clone

from cavityprobe import (
    CavityConfig,
    DetectorConfig,
    ExperimentSetup,
    FieldPreparation,
    PerturbationEstimator,
    ProbeSweepModel,
    fit_perturbation,
    synthesize_observations,
)
from cavityprobe.errors import DegenerateObservations, ValidationError
from cavityprobe.inverse import ObservationSet

OMEGAS = np.linspace(2.0, 9.0, 8)


@pytest.fixture(scope="module")
def fit_setup():
    return ExperimentSetup(
        scenario="proper-frame",
        a0=0.5,
        cavity=CavityConfig(L=1.0, n_max=10, n_min=10, mode_tail_tol=1e-3),
        detector=DetectorConfig(Omega=1.0, coupling=0.01),
        field=FieldPreparation(mode_index=1, alpha=10.0),
        quad_tol=1e-7,
    )


@pytest.fixture(scope="module")
def model(fit_setup):
    return ProbeSweepModel(fit_setup, OMEGAS)


class TestProbeSweepModel:
    def test_matches_single_gap_reference(self, fit_setup, model):
        batch = model.probabilities(0.04, 2.5)
        for i in (0, 4, 7):
            ref = fit_setup.with_detector_gap(float(OMEGAS[i])).probability(0.04, 2.5)
            assert batch[i] == pytest.approx(ref.P, rel=1e-12)

    def test_nonuniform_gap_grid(self, fit_setup):
        gaps = np.array([2.0, 3.7, 8.1])
        m = ProbeSweepModel(fit_setup, gaps)
        batch = m.probabilities(0.04, 2.5)
        ref = fit_setup.with_detector_gap(3.7).probability(0.04, 2.5)
        assert batch[1] == pytest.approx(ref.P, rel=1e-12)

    def test_cache_hit_is_identical(self, model):
        a = model.probabilities(0.02, 1.5)
        b = model.probabilities(0.02, 1.5)
        assert a is b


class TestSynthesize:
    def test_noiseless_equals_model(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        assert obs.sigmas is None
        assert np.array_equal(obs.probabilities, model.probabilities(0.05, 2.0))

    def test_seed_determinism(self, fit_setup):
        a = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS, 1e-5, rng_seed=42)
        b = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS, 1e-5, rng_seed=42)
        assert a == b
        c = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS, 1e-5, rng_seed=43)
        assert a.probabilities != c.probabilities

    def test_noise_level_statistics(self, fit_setup, model):
        # Empirical residual of the truth should sit at the injected noise
        # level when averaged over many seeds.
        truth = model.probabilities(0.05, 2.0)
        sigma = 0.01 * float(np.mean(truth))
        chi2 = []
        for seed in range(100):
            obs = synthesize_observations(
                fit_setup, 0.05, 2.0, OMEGAS, sigma, rng_seed=seed
            )
            resid = np.asarray(obs.probabilities) - truth
            chi2.append(np.mean((resid / sigma) ** 2))
        assert np.mean(chi2) == pytest.approx(1.0, rel=0.2)

    def test_invariants(self, fit_setup):
        with pytest.raises(ValidationError):
            synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS, noise_sigma=-1.0)
        with pytest.raises(ValidationError):
            ObservationSet(fit_setup, (1.0,), (0.5,))
        with pytest.raises(ValidationError):
            ObservationSet(fit_setup, (1.0, 2.0), (0.5, 1.5))


class TestFit:
    def test_noiseless_recovery(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        res = fit_perturbation(obs, search_box=((0.0, 0.2), (0.5, 8.0)), model=model)
        assert abs(res.epsilon_hat - 0.05) <= 1e-3
        assert abs(res.gamma_hat - 2.0) <= 1e-2
        assert res.converged
        assert res.gamma_identifiable
        assert res.residual_norm < 1e-6

    def test_truth_scores_no_better_than_optimum(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        res = fit_perturbation(obs, model=model)
        y = np.asarray(obs.probabilities)
        truth_obj = float(np.sum((model.probabilities(0.05, 2.0) - y) ** 2))
        # The returned optimum may not beat the truth by more than the
        # forward model's numerical tolerance allows.
        tol = len(y) * (10 * fit_setup.quad_tol * float(np.max(y))) ** 2
        assert res.residual_norm**2 <= truth_obj + tol

    def test_null_perturbation_flags_gamma(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.0, 0.0, OMEGAS)
        res = fit_perturbation(obs, model=model)
        assert res.epsilon_hat <= 1e-3
        assert not res.gamma_identifiable
        assert res.residual_norm <= 1e-8

    def test_reweighting_invariance(self, fit_setup, model):
        obs = synthesize_observations(
            fit_setup, 0.05, 2.0, OMEGAS, noise_sigma=2e-6, rng_seed=3
        )
        scaled = ObservationSet(
            setup=obs.setup,
            settings=obs.settings,
            probabilities=obs.probabilities,
            sigmas=tuple(5.0 * s for s in obs.sigmas),
        )
        r1 = fit_perturbation(obs, model=model)
        r2 = fit_perturbation(scaled, model=model)
        assert r1.epsilon_hat == r2.epsilon_hat
        assert r1.gamma_hat == r2.gamma_hat

    def test_determinism(self, fit_setup):
        obs = synthesize_observations(
            fit_setup, 0.05, 2.0, OMEGAS, noise_sigma=2e-6, rng_seed=5
        )
        r1 = fit_perturbation(obs)
        r2 = fit_perturbation(obs)
        assert r1 == r2

    def test_estimates_stay_in_box(self, fit_setup, model):
        obs = synthesize_observations(
            fit_setup, 0.05, 2.0, OMEGAS, noise_sigma=5e-5, rng_seed=11
        )
        box = ((0.0, 0.06), (0.5, 2.2))
        res = fit_perturbation(obs, search_box=box, model=model)
        assert box[0][0] <= res.epsilon_hat <= box[0][1]
        assert box[1][0] <= res.gamma_hat <= box[1][1]

    def test_budget_validation_and_exhaustion(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        with pytest.raises(ValidationError):
            fit_perturbation(obs, budget=10, model=model)
        res = fit_perturbation(obs, budget=256, model=model)  # grid only
        assert not res.converged
        assert res.iterations <= 256 + 1

    def test_degenerate_observations(self, fit_setup):
        with pytest.raises(DegenerateObservations):
            fit_perturbation(
                ObservationSet(fit_setup, (1.0, 2.0, 3.0), (0.5, 0.5, 0.5))
            )

    def test_three_parameter_fit(self, fit_setup, model):
        obs = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        res = fit_perturbation(
            obs,
            search_box=((0.0, 0.2), (0.5, 8.0)),
            a0_box=(0.3, 0.8),
            budget=2500,
            model=model,
        )
        assert res.a0_hat == pytest.approx(0.5, abs=0.02)
        assert abs(res.epsilon_hat - 0.05) <= 5e-3
        assert abs(res.gamma_hat - 2.0) <= 5e-2


class TestEstimatorAPI:
    def test_sklearn_protocol(self):
        est = PerturbationEstimator(budget=400, n_max=8, n_min=8)
        params = est.get_params()
        assert params["budget"] == 400
        cloned = clone(est)
        assert cloned.get_params() == params
        est.set_params(alpha=7.0)
        assert est.alpha == 7.0

    def test_fit_predict_roundtrip(self, fit_setup):
        truth = synthesize_observations(fit_setup, 0.05, 2.0, OMEGAS)
        est = PerturbationEstimator(
            a0=0.5, n_max=10, n_min=10, mode_tail_tol=1e-3, quad_tol=1e-7,
            budget=600, refine_starts=1,
        )
        X = np.asarray(truth.settings)[:, None]
        y = np.asarray(truth.probabilities)
        est.fit(X, y)
        assert est.epsilon_ == pytest.approx(0.05, abs=2e-3)
        assert est.gamma_ == pytest.approx(2.0, abs=5e-2)
        pred = est.predict(X)
        assert np.allclose(pred, y, rtol=1e-3)
        assert est.score(X, y) > 0.999

    def test_rejects_multicolumn(self):
        est = PerturbationEstimator()
        with pytest.raises(ValidationError):
            est.fit(np.ones((4, 2)), np.full(4, 0.1))
