import numpy as np
import pytest

from semiactive import BoucWenParams, PdGains, VehicleParams


@pytest.fixture
def vehicle():
    return VehicleParams()


@pytest.fixture
def damper():
    return BoucWenParams()


@pytest.fixture
def gains():
    return PdGains()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
