import numpy as np
import pytest


def make_spd(rng, m, jitter=1.0):
    """Random well-conditioned SPD matrix."""
    a = rng.standard_normal((m, m))
    return a @ a.T + jitter * m * np.eye(m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
