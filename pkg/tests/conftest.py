import numpy as np
import pytest

from qlab.ensembles import Ensemble


def random_ensemble(rng: np.random.Generator, n: int, d: int) -> Ensemble:
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    p = rng.dirichlet(np.ones(n))
    return Ensemble(p, z)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (a + a.conj().T)


@pytest.fixture
def rng():
    return np.random.default_rng(20260)
