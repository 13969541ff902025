import numpy as np
import pytest

from gyver.detours.datasets import bumpy_icosphere, gaussian_pair, moons_pair


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope='session')
def moons():
    return moons_pair(n=40, seed=0)


@pytest.fixture(scope='session')
def gaussian_samples():
    return gaussian_pair(n=30, seed=0)


@pytest.fixture(scope='session')
def bumpy_mesh():
    return bumpy_icosphere(subdivisions=3)
