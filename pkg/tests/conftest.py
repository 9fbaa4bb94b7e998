import numpy as np
import pytest

from lpverify import TorusGrid
from lpverify.spectral import TWO_PI


@pytest.fixture(scope="session")
def grid16():
    return TorusGrid(16, TWO_PI)


@pytest.fixture(scope="session")
def grid32():
    return TorusGrid(32, TWO_PI)


@pytest.fixture(scope="session")
def grid64():
    return TorusGrid(64, TWO_PI)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
