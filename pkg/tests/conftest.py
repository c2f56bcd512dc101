import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_hermitian(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g + g.conj().T


def random_complex(rows, cols, rng):
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))
