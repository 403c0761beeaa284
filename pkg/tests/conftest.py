import numpy as np
import pytest

from nonholo.params import ControlGains, VehicleParams
from nonholo.path import CurvatureProfile, build_path


@pytest.fixture(scope="session")
def params():
    return VehicleParams()


@pytest.fixture(scope="session")
def gains():
    return ControlGains()


@pytest.fixture(scope="session")
def n4_profile():
    return CurvatureProfile.periodic(4, 250.0)


@pytest.fixture(scope="session")
def n4_table(n4_profile):
    return build_path(n4_profile)


@pytest.fixture(scope="session")
def straight_table():
    return build_path(CurvatureProfile.straight(), length=200.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
