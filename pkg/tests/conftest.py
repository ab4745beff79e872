import numpy as np
import pytest

from scenario_witness.states import RngStream


def random_hermitian(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (z + z.conj().T)


def random_psd(d, rng, rank=None):
    g = rng.standard_normal((d, rank or d)) + 1j * rng.standard_normal((d, rank or d))
    return g @ g.conj().T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def stream():
    return RngStream(2024)
