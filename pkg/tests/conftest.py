import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bcbounds.channel import bssc, noiseless

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def half():
    return bssc(0.5)


@pytest.fixture(scope="session")
def clean():
    return noiseless(2)
