import numpy as np
import pytest

from rssd.lti import CompensatorBank, FrequencyGrid, StateSpacePlant


@pytest.fixture
def grid():
    return FrequencyGrid.default()


@pytest.fixture
def coarse_grid():
    return FrequencyGrid(np.logspace(-2, 3, 120))


def random_stable_siso(rng, max_order=3) -> StateSpacePlant:
    """Random strictly proper stable SISO plant with poles in [-5, -0.1]."""
    n = int(rng.integers(1, max_order + 1))
    poles = -rng.uniform(0.1, 5.0, size=n)
    A = np.diag(poles)
    B = rng.normal(0.0, 1.0, size=(n, 1))
    C = rng.normal(0.0, 1.0, size=(1, n))
    return StateSpacePlant(A, B, C, np.zeros((1, 1)))


def random_siso(rng, max_order=2) -> StateSpacePlant:
    """Random SISO plant whose poles may be unstable but stay off the axis."""
    n = int(rng.integers(1, max_order + 1))
    poles = rng.uniform(0.2, 4.0, size=n) * rng.choice([-1.0, 1.0], size=n)
    A = np.diag(poles)
    B = rng.normal(0.0, 1.0, size=(n, 1))
    C = rng.normal(0.0, 1.0, size=(1, n))
    return StateSpacePlant(A, B, C, np.zeros((1, 1)))


def identity_banks(m, r):
    return CompensatorBank.identity(m, "in"), CompensatorBank.identity(r, "out")
