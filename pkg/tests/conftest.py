import numpy as np
import pytest

from src.measures.profiles import RadialDensitySpec, build_profile
from src.transport.radial import monotone_map


@pytest.fixture(scope="session")
def uniform_profile():
    return build_profile(RadialDensitySpec.uniform(2))


@pytest.fixture(scope="session")
def gaussian_profile():
    return build_profile(RadialDensitySpec.gaussian_like(1.0))


@pytest.fixture(scope="session")
def gaussian_map(uniform_profile, gaussian_profile):
    return monotone_map(uniform_profile, gaussian_profile)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
