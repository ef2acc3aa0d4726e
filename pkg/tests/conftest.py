"""Shared cheap configurations for the unit tests.

Unit tests run on deliberately small mode caps and loose-but-controlled
tolerances so the whole suite stays fast; the acceptance module pins the
full-size criteria.
"""

import warnings

import numpy as np
import pytest

from cavityprobe import (
    CavityConfig,
    DetectorConfig,
    ExperimentSetup,
    FieldPreparation,
    LAB_FRAME,
    PROPER_FRAME,
)


@pytest.fixture(autouse=True)
def _silence_perturbative_warning():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="P = .*")
        yield


@pytest.fixture
def small_cavity():
    return CavityConfig(L=1.0, n_max=12, n_min=5, mode_tail_tol=1e-4)


@pytest.fixture
def detector():
    return DetectorConfig(Omega=7.0, coupling=0.01)


@pytest.fixture
def coherent_field():
    return FieldPreparation(mode_index=1, alpha=5.0)


def make_setup(scenario=PROPER_FRAME, a0=0.5, **overrides):
    kwargs = dict(
        scenario=scenario,
        a0=a0,
        cavity=CavityConfig(L=1.0, n_max=12, n_min=5, mode_tail_tol=1e-4),
        detector=DetectorConfig(Omega=7.0, coupling=0.01),
        field=FieldPreparation(mode_index=1, alpha=5.0),
        quad_tol=1e-8,
    )
    kwargs.update(overrides)
    return ExperimentSetup(**kwargs)


@pytest.fixture
def proper_setup():
    return make_setup(PROPER_FRAME)


@pytest.fixture
def lab_setup():
    return make_setup(LAB_FRAME, a0=0.5)


def riemann_worldline_oracle(p, tau, num_nodes=1_000_000):
    """Uniform midpoint Riemann sum for the proper-frame coordinates."""
    from cavityprobe import rapidity

    h = tau / num_nodes
    s = (np.arange(num_nodes) + 0.5) * h
    xi = rapidity(p, s)
    return p.x0 + h * np.sinh(xi).sum(), p.t0 + h * np.cosh(xi).sum()
