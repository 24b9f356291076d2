import numpy as np
import pytest

from sphkol.harmonics import build_grid
from sphkol.sht import random_real_field


@pytest.fixture(scope="session")
def grid8():
    return build_grid(8)


@pytest.fixture(scope="session")
def grid12():
    return build_grid(12)


@pytest.fixture(scope="session")
def grid16():
    return build_grid(16)


@pytest.fixture(scope="session")
def grid32():
    return build_grid(32)


def rand_field(N, seed, amplitude=1.0, decay=0.5, degrees=None):
    return random_real_field(N, np.random.default_rng(seed), amplitude=amplitude, decay=decay, degrees=degrees)
