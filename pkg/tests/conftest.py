import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "oua",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("oua")


@pytest.fixture
def rng():
    return np.random.default_rng(0)
