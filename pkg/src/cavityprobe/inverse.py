"""Recover perturbation parameters from observed transition probabilities.

An observation set holds probabilities recorded while sweeping one probe
control, by default the detector gap (physically: reading out different
atomic transitions).  The fit minimizes the weighted squared residual
between those observations and the forward model over (epsilon, gamma),
optionally also the base acceleration: a coarse multistart grid followed
by derivative-free simplex refinement from the best grid points.  The
forward model is expensive and its quadrature tails are not smooth enough
for safe finite differencing, hence no gradient methods.

``ProbeSweepModel`` is the batched forward model: one worldline per
candidate, mode integrals evaluated once per mode and reduced against
every probe gap simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .cavity import mode_frequency, mode_profile
from .errors import CavityProbeError, DegenerateObservations, ValidationError
from .experiment import ExperimentSetup
from .quadrature import WGK, XGK, _cumtrapz


@dataclass(frozen=True)
class ObservationSet:
    """Recorded probabilities for a sweep of one probe control."""

    setup: ExperimentSetup
    settings: tuple
    probabilities: tuple
    sigmas: Optional[tuple] = None
    setting_name: str = "Omega"

    def __post_init__(self):
        if len(self.settings) < 2:
            raise ValidationError("need at least 2 observations to fit")
        if len(self.probabilities) != len(self.settings):
            raise ValidationError("settings and probabilities differ in length")
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0) or np.any(p > 1):
            raise ValidationError("observed probabilities must lie in [0, 1]")
        if self.sigmas is not None and len(self.sigmas) != len(self.settings):
            raise ValidationError("sigmas length mismatch")


@dataclass(frozen=True)
class EstimationResult:
    epsilon_hat: float
    gamma_hat: float
    residual_norm: float
    iterations: int
    converged: bool
    search_box: tuple
    a0_hat: Optional[float] = None
    gamma_identifiable: bool = True


class ProbeSweepModel:
    """P(Omega_k; epsilon, gamma) for a fixed setup, batched over gaps.

    The worldline and the per-mode factor exp(i*w_n*t)*sin(k_n*x) do not
    depend on the detector gap, so they are evaluated once per candidate
    and combined with the gap phases exp(+/- i*Omega_k*tau) afterwards.
    For a uniformly spaced gap grid the phase matrix is built by repeated
    multiplication instead of fresh exponentials.  Results are cached per
    (epsilon, gamma, a0); repeated fits against the same candidate grid
    reuse them.
    """

    def __init__(self, setup: ExperimentSetup, omegas: Sequence[float]):
        om = np.asarray(omegas, dtype=float)
        if om.ndim != 1 or len(om) < 1 or np.any(om <= 0):
            raise ValidationError("probe gaps must be a 1-D array of positives")
        self.setup = setup
        self.omegas = om
        d = np.diff(om)
        self._uniform = len(om) > 1 and np.allclose(d, d[0], rtol=1e-12, atol=0.0)
        self._cache: dict = {}

    def probabilities(self, epsilon: float, gamma: float, a0: float | None = None):
        key = (
            float(epsilon),
            0.0 if epsilon == 0 else float(gamma),
            float(self.setup.a0 if a0 is None else a0),
        )
        hit = self._cache.get(key)
        if hit is None:
            hit = self._compute(*key)
            self._cache[key] = hit
        return hit

    # -- internals ---------------------------------------------------------

    def _gap_phases(self, tau: np.ndarray) -> np.ndarray:
        """Matrix exp(i*Omega_k*tau_m), shape (K, M)."""
        if not self._uniform:
            return np.exp(1j * self.omegas[:, None] * tau[None, :])
        out = np.empty((len(self.omegas), len(tau)), dtype=complex)
        out[0] = np.exp(1j * self.omegas[0] * tau)
        if len(self.omegas) > 1:
            step = np.exp(1j * (self.omegas[1] - self.omegas[0]) * tau)
            for k in range(1, len(self.omegas)):
                out[k] = out[k - 1] * step
        return out

    # Panels a quarter oscillation wide keep the Kronrod rule far below the
    # fit's noise scale while costing 2.5x fewer nodes than the certified
    # single-gap integrator; consistency with the reference path is pinned
    # by tests.
    _MAX_PHASE = np.pi / 2.0

    def _compute(self, epsilon: float, gamma: float, a0: float) -> np.ndarray:
        setup = self.setup if a0 == self.setup.a0 else replace(self.setup, a0=a0)
        w = setup.worldline(epsilon, gamma)
        c = setup.cavity
        f = setup.field
        lam2_L = setup.detector.coupling**2 / c.L
        omega_max = float(self.omegas.max())
        K = len(self.omegas)

        # One rate table serves every mode: the panel-sizing bound is
        # Omega_max + omega_n * mode_rate_part(u).
        grid = np.linspace(0.0, w.T, 4097)
        part_cum = _cumtrapz(w.mode_rate_part(grid), grid)

        coherent = np.zeros(K)
        plus_sq = []  # per mode, arrays of shape (K,)
        for n in range(1, c.n_max + 1):
            i_plus, i_minus = self._mode_integrals(
                w,
                setup,
                n,
                omega_max,
                grid,
                part_cum,
                need_minus=(n == f.mode_index and f.alpha > 0),
            )
            sq = np.abs(i_plus) ** 2
            plus_sq.append(sq)
            if i_minus is not None:
                k_j = mode_frequency(f.mode_index, c.L)
                coherent = (
                    lam2_L
                    * (f.alpha**2 / k_j)
                    * (np.abs(i_plus) ** 2 + np.abs(i_minus) ** 2)
                )
            if n >= max(c.n_min, 10, f.mode_index):
                running = coherent + lam2_L * np.sum(plus_sq, axis=0)
                tail = lam2_L * np.sum(plus_sq[-10:], axis=0)
                if np.all(tail < c.mode_tail_tol * running):
                    break
        return coherent + lam2_L * np.sum(plus_sq, axis=0)

    def _mode_integrals(self, w, setup, n, omega_max, grid, part_cum, need_minus):
        c = setup.cavity
        omega_n = mode_frequency(n, c.L)
        theta = omega_max * grid + omega_n * part_cum
        n_panels = int(max(4, np.ceil(theta[-1] / self._MAX_PHASE)))
        targets = np.linspace(0.0, theta[-1], n_panels + 1)
        edges = np.interp(targets, theta, grid)
        edges[0], edges[-1] = 0.0, w.T

        a, b = edges[:-1], edges[1:]
        center, halfw = 0.5 * (a + b), 0.5 * (b - a)
        nodes = (center[:, None] + halfw[:, None] * XGK[None, :]).ravel()
        weights = (halfw[:, None] * WGK[None, :]).ravel()

        x, t, tau, dtau = w.kinematics(nodes)
        base = np.exp(1j * omega_n * t) * mode_profile(n, c.L, x)
        if not setup.drop_redshift:
            base = dtau * base
        weighted = weights * base

        phases = self._gap_phases(tau)
        i_plus = phases @ weighted
        i_minus = np.conj(phases) @ weighted if need_minus else None
        return i_plus, i_minus


def synthesize_observations(
    setup: ExperimentSetup,
    true_epsilon: float,
    true_gamma: float,
    probe_settings: Sequence[float],
    noise_sigma: float = 0.0,
    rng_seed: int = 0,
    relative: bool = False,
) -> ObservationSet:
    """Forward-model observations plus optional Gaussian readout noise.

    ``noise_sigma`` is an absolute standard deviation by default; with
    ``relative=True`` each sample gets sigma_k = noise_sigma * P_k (a
    beam-averaged rate estimate whose error scales with the rate).
    """
    if noise_sigma < 0:
        raise ValidationError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    model = ProbeSweepModel(setup, probe_settings)
    p = model.probabilities(true_epsilon, true_gamma)
    sigmas = None
    if noise_sigma > 0:
        rng = np.random.default_rng(rng_seed)
        sig = noise_sigma * p if relative else np.full_like(p, noise_sigma)
        p = np.clip(p + sig * rng.standard_normal(len(p)), 0.0, 1.0)
        sigmas = tuple(float(s) for s in sig)
    return ObservationSet(
        setup=setup,
        settings=tuple(float(s) for s in probe_settings),
        probabilities=tuple(float(v) for v in p),
        sigmas=sigmas,
    )


def fit_perturbation(
    obs: ObservationSet,
    search_box: tuple = ((0.0, 0.2), (0.5, 8.0)),
    budget: int = 2000,
    *,
    a0_box: Optional[tuple] = None,
    grid_shape: Optional[tuple] = None,
    refine_starts: int = 3,
    xatol: float = 1e-4,
    model: Optional[ProbeSweepModel] = None,
) -> EstimationResult:
    """Weighted least-squares fit of (epsilon, gamma) [, a0].

    Coarse multistart grid (default 16x16) over the search box, then
    Nelder-Mead refinement in box-normalized coordinates from the best
    ``refine_starts`` grid points, declared converged when the simplex
    diameter falls below ``xatol`` relative in every parameter.  ``budget``
    caps the total number of forward-model evaluations; when it runs out
    the best point so far is returned with ``converged=False``.
    """
    y = np.asarray(obs.probabilities, dtype=float)
    if np.ptp(y) == 0:
        raise DegenerateObservations("all observed probabilities are identical")
    if obs.sigmas is not None:
        sig = np.asarray(obs.sigmas, dtype=float)
        weights = 1.0 / sig**2
    else:
        sig = None
        weights = np.ones_like(y)

    boxes = [tuple(map(float, search_box[0])), tuple(map(float, search_box[1]))]
    if a0_box is not None:
        boxes.append(tuple(map(float, a0_box)))
    for lo, hi in boxes:
        if not hi > lo:
            raise ValidationError(f"search box range ({lo}, {hi}) has no measure")
    if grid_shape is None:
        grid_shape = (16, 16) if a0_box is None else (12, 12, 8)
    grid_size = int(np.prod(grid_shape))
    if budget < grid_size:
        raise ValidationError(
            f"budget {budget} is smaller than the coarse grid ({grid_size})"
        )

    if model is None:
        model = ProbeSweepModel(obs.setup, obs.settings)
    evals = 0

    def objective(theta) -> float:
        nonlocal evals
        for v, (lo, hi) in zip(theta, boxes):
            if not (lo <= v <= hi):
                return np.inf
        evals += 1
        a0 = theta[2] if len(theta) == 3 else None
        try:
            resid = model.probabilities(theta[0], theta[1], a0) - y
        except CavityProbeError:
            # Physically infeasible candidate (e.g. superluminal lab-frame
            # perturbation); treat as an infinitely bad fit, not a crash.
            return np.inf
        return float(np.sum(weights * resid**2))

    axes = [np.linspace(lo, hi, m) for (lo, hi), m in zip(boxes, grid_shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid_points = np.stack([m.ravel() for m in mesh], axis=1)
    grid_obj = np.array([objective(p) for p in grid_points])

    gamma_identifiable = _gamma_identifiable(
        grid_obj.reshape(grid_shape), y, sig, weights, obs.setup
    )

    order = np.argsort(grid_obj, kind="stable")
    best_theta = grid_points[order[0]]
    best_obj = grid_obj[order[0]]

    widths = np.array([hi - lo for lo, hi in boxes])
    los = np.array([lo for lo, _ in boxes])
    any_refined = False
    for rank in range(min(refine_starts, len(order))):
        remaining = budget - evals
        if remaining <= len(boxes) + 1:
            break
        start = (grid_points[order[rank]] - los) / widths
        res = minimize(
            lambda u: objective(los + u * widths),
            start,
            method="Nelder-Mead",
            options={
                "xatol": xatol,
                "fatol": np.inf,
                "maxfev": remaining // max(refine_starts - rank, 1),
                "initial_simplex": _initial_simplex(start),
            },
        )
        if res.success:
            any_refined = True
        if res.fun < best_obj:
            best_obj = res.fun
            best_theta = los + res.x * widths
    converged = any_refined and evals <= budget

    best_theta = np.clip(best_theta, los, los + widths)
    return EstimationResult(
        epsilon_hat=float(best_theta[0]),
        gamma_hat=float(best_theta[1]),
        a0_hat=float(best_theta[2]) if len(boxes) == 3 else None,
        residual_norm=float(np.sqrt(max(best_obj, 0.0))),
        iterations=evals,
        converged=converged,
        search_box=tuple(boxes),
        gamma_identifiable=gamma_identifiable,
    )


def _initial_simplex(start: np.ndarray) -> np.ndarray:
    # Vertices 5% of the box away from the start, folded back inside.
    n = len(start)
    simplex = np.tile(start, (n + 1, 1))
    for i in range(n):
        step = 0.05 if start[i] + 0.05 <= 1.0 else -0.05
        simplex[i + 1, i] += step
    return simplex


def _gamma_identifiable(grid_obj, y, sig, weights, setup) -> bool:
    """Flag gamma as unidentifiable when the objective is flat across it.

    Compares the spread of the objective along the gamma axis (at the best
    epsilon row, minimized over any remaining axes) against ten times the
    objective's noise floor: the expected chi-square when sigmas are given,
    otherwise the forward model's own numerical scatter.
    """
    if sig is not None:
        floor = float(np.sum(weights * sig**2))  # E[objective] at the truth
    else:
        tol = max(setup.quad_tol, setup.cavity.mode_tail_tol)
        atol = max(1e-14, tol * float(np.max(np.abs(y))))
        floor = float(np.sum(weights) * atol**2)
    reduced = grid_obj
    while reduced.ndim > 2:
        reduced = reduced.min(axis=-1)
    best_eps_row = reduced[int(np.argmin(reduced.min(axis=1)))]
    return bool(np.std(best_eps_row) > 10.0 * floor)


class PerturbationEstimator(RegressorMixin, BaseEstimator):
    """Scikit-learn estimator recovering (epsilon, gamma) from gap sweeps.

    ``X`` holds the probe detector gaps as a single-column array, ``y``
    the observed transition probabilities.  After ``fit`` the recovered
    parameters are available as ``epsilon_`` and ``gamma_`` and
    ``predict`` evaluates the fitted forward model at new gaps.
    """

    def __init__(
        self,
        scenario: str = "proper-frame",
        a0: float = 0.5,
        cavity_length: float = 1.0,
        coupling: float = 0.01,
        alpha: float = 10.0,
        coherent_mode: int = 1,
        n_min: int = 10,
        n_max: int = 32,
        mode_tail_tol: float = 1e-3,
        quad_tol: float = 1e-7,
        search_box: tuple = ((0.0, 0.2), (0.5, 8.0)),
        budget: int = 2000,
        refine_starts: int = 3,
        xatol: float = 1e-4,
    ):
        self.scenario = scenario
        self.a0 = a0
        self.cavity_length = cavity_length
        self.coupling = coupling
        self.alpha = alpha
        self.coherent_mode = coherent_mode
        self.n_min = n_min
        self.n_max = n_max
        self.mode_tail_tol = mode_tail_tol
        self.quad_tol = quad_tol
        self.search_box = search_box
        self.budget = budget
        self.refine_starts = refine_starts
        self.xatol = xatol

    def _setup(self) -> ExperimentSetup:
        from .cavity import CavityConfig
        from .response import DetectorConfig, FieldPreparation

        return ExperimentSetup(
            scenario=self.scenario,
            a0=self.a0,
            cavity=CavityConfig(
                L=self.cavity_length,
                n_max=self.n_max,
                n_min=self.n_min,
                mode_tail_tol=self.mode_tail_tol,
            ),
            detector=DetectorConfig(Omega=1.0, coupling=self.coupling),
            field=FieldPreparation(mode_index=self.coherent_mode, alpha=self.alpha),
            quad_tol=self.quad_tol,
        )

    def fit(self, X, y, sigma=None):
        X, y = check_X_y(X, y, ensure_min_samples=2)
        if X.shape[1] != 1:
            raise ValidationError("X must hold exactly one probe-setting column")
        obs = ObservationSet(
            setup=self._setup(),
            settings=tuple(float(v) for v in X[:, 0]),
            probabilities=tuple(float(v) for v in y),
            sigmas=None if sigma is None else tuple(float(s) for s in sigma),
        )
        result = fit_perturbation(
            obs,
            search_box=self.search_box,
            budget=self.budget,
            refine_starts=self.refine_starts,
            xatol=self.xatol,
        )
        self.epsilon_ = result.epsilon_hat
        self.gamma_ = result.gamma_hat
        self.result_ = result
        self.n_iter_ = result.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "epsilon_")
        X = check_array(X)
        model = ProbeSweepModel(self._setup(), X[:, 0])
        return np.asarray(model.probabilities(self.epsilon_, self.gamma_))
