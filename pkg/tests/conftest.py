"""Shared fixtures: small models, quadratures, and grids used across tests."""

import numpy as np
import pytest

from fenesim.grid import Grid1D
from fenesim.kinetic import FpOperators, KineticParams
from fenesim.potentials import build_quadrature, spring_model


@pytest.fixture
def model_b4():
    return spring_model(K=1, b=4.0, d=1)


@pytest.fixture
def quad_b4(model_b4):
    return build_quadrature(model_b4, 16)


@pytest.fixture
def grid16():
    return Grid1D(16, 1.0)


@pytest.fixture
def kparams():
    return KineticParams(epsilon=0.01, lam=1.0)


@pytest.fixture
def ops_b4(model_b4, quad_b4, kparams):
    return FpOperators(model_b4, quad_b4, kparams)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
