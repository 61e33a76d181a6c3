import numpy as np
import pytest


def random_symmetric(rng, m, scale=1.0):
    a = rng.standard_normal((m, m)) * scale
    return (a + a.T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
