import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlab.linalg import (
    JacobiConvergenceError,
    fix_phase,
    hermitian,
    inv_sqrt,
    jacobi_eigh,
    lambda_max,
    projector,
    pure_state,
    spectral_fn,
    sqrtm_psd,
    support_projector,
    trace_product,
)

from conftest import random_hermitian


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 9))
def test_jacobi_matches_lapack(seed, d):
    h = random_hermitian(np.random.default_rng(seed), d)
    w, v = jacobi_eigh(h)
    ref = np.linalg.eigvalsh(h)[::-1]
    scale = max(1.0, np.linalg.norm(h))
    assert np.allclose(w, ref, atol=1e-12 * scale)
    assert np.allclose(v.conj().T @ v, np.eye(d), atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-11 * scale)


def test_jacobi_batched_equals_single(rng):
    hs = np.array([random_hermitian(rng, 4) for _ in range(7)])
    w, v = jacobi_eigh(hs)
    for k in range(7):
        wk, _ = jacobi_eigh(hs[k])
        assert np.allclose(w[k], wk, atol=1e-13)
        assert np.allclose(v[k] @ np.diag(w[k]) @ v[k].conj().T, hs[k], atol=1e-12)


def test_small_examples():
    w, _ = jacobi_eigh(np.array([[2.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(w, [2, 1])
    w, v = jacobi_eigh(np.array([[0, -1j], [1j, 0]]))
    assert np.allclose(w, [1, -1], atol=1e-14)
    assert np.allclose(np.abs(v[:, 0]) ** 2, [0.5, 0.5])
    w, _ = jacobi_eigh(np.eye(3))
    assert np.allclose(w, 1)


def test_degenerate_spectrum(rng):
    q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
    h = q @ np.diag([3, 3, 1, 1, 1]) @ q.conj().T
    w, v = jacobi_eigh(h)
    assert np.allclose(w, [3, 3, 1, 1, 1], atol=1e-12)
    assert np.allclose(v @ np.diag(w) @ v.conj().T, h, atol=1e-12)


def test_sweep_cap_raises(rng):
    with pytest.raises(JacobiConvergenceError) as info:
        jacobi_eigh(random_hermitian(rng, 8), max_sweeps=1)
    assert info.value.residual > 0


def test_hermitian_validation():
    with pytest.raises(ValueError):
        hermitian([[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        hermitian(np.zeros((2, 3)))


def test_pure_state_and_phase():
    with pytest.raises(ValueError):
        pure_state([1, 1])
    v = fix_phase(np.array([0, 1j, 1]) / np.sqrt(2))
    assert v[1].real > 0 and abs(v[1].imag) < 1e-15


def test_spectral_functions(rng):
    a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    rho = a @ a.conj().T
    r = inv_sqrt(rho)
    assert np.allclose(r @ rho @ r, np.eye(4), atol=1e-10)
    s = sqrtm_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-10)


def test_singular_operator_uses_support():
    rho = np.diag([0.5, 0.5, 0.0])
    assert np.allclose(inv_sqrt(rho), np.diag([np.sqrt(2), np.sqrt(2), 0]))
    assert np.allclose(support_projector(rho), np.diag([1, 1, 0]))


def test_spectral_fn_undefined():
    with pytest.raises(ValueError):
        spectral_fn(np.diag([1.0, -1.0]), np.sqrt)


def test_trace_product():
    p = projector([1, 0])
    q = projector(np.array([1, 1]) / np.sqrt(2))
    assert trace_product(p, q) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        trace_product(p, np.eye(3))


def test_lambda_max():
    val, vec = lambda_max(np.array([[1.0, 0.5], [0.5, 1.0]]))
    assert val == pytest.approx(1.5)
    assert abs(abs(np.vdot(vec, [1, 1])) / np.sqrt(2) - 1) < 1e-12
