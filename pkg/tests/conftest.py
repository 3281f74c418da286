import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(12345))


def random_spd(rng, n, shift=0.1):
    m = rng.standard_normal((n, n))
    return m @ m.T / n + shift * np.eye(n)
