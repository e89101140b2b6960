import numpy as np
import pytest

from cars_shaping import CarsConfiguration, MediumParams

BANDWIDTH = 50.0
LINEWIDTH = 4.8


@pytest.fixture
def default_config():
    return CarsConfiguration.default(BANDWIDTH, MediumParams())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
