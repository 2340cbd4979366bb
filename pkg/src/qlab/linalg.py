"""Small dense complex linear algebra.

Everything here works on plain numpy arrays. Hermitian operators are
``(d, d)`` complex arrays, pure states are length-``d`` complex vectors.
The eigensolver is a cyclic Jacobi method that also accepts stacks of
matrices ``(..., d, d)``, which is how the optimizer diagonalizes many
mapping operators at once.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
SUPPORT_TOL = 1e-10

_JACOBI_TOL = 1e-13
_JACOBI_MAX_SWEEPS = 100


class JacobiConvergenceError(ArithmeticError):
    """Raised when the Jacobi sweeps hit the cap without converging."""

    def __init__(self, residual: float, sweeps: int):
        super().__init__(
            f"Jacobi eigensolver did not converge after {sweeps} sweeps "
            f"(off-diagonal norm {residual:.3e})"
        )
        self.residual = residual
        self.sweeps = sweeps


def hermitian(matrix, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a square matrix as Hermitian and return (H + H^dagger)/2."""
    h = np.asarray(matrix, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {h.shape}")
    err = np.max(np.abs(h - h.conj().T))
    if err > tol:
        raise ValueError(f"matrix is not Hermitian (max |H - H^dagger| = {err:.3e})")
    return 0.5 * (h + h.conj().T)


def pure_state(amplitudes, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a unit vector and return it as a complex array."""
    v = np.asarray(amplitudes, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"expected a non-empty vector, got shape {v.shape}")
    norm2 = np.vdot(v, v).real
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"state is not normalized (<psi|psi> = {norm2!r})")
    return v


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def fix_phase(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Rotate the global phase so the first non-negligible amplitude is real positive."""
    v = np.asarray(v, dtype=complex)
    idx = np.flatnonzero(np.abs(v) > tol)
    if idx.size == 0:
        return v.copy()
    a = v[idx[0]]
    return v * (abs(a) / a)


def _off_norm(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    mask = ~np.eye(d, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[..., mask]) ** 2, axis=-1))


def jacobi_eigh(h: np.ndarray, tol: float = _JACOBI_TOL, max_sweeps: int = _JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of Hermitian matrices.

    Accepts a single matrix or a stack ``(..., d, d)``. Each matrix is
    swept until its off-diagonal Frobenius norm drops below
    ``tol * ||H||_F``; matrices that converge early are frozen so the
    result for one matrix does not depend on what else is in the stack.

    Returns eigenvalues in non-increasing order and the matching
    eigenvectors as columns, like ``numpy.linalg.eigh`` but descending.
    """
    a = np.array(h, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    batch = a.shape[:-2]
    d = a.shape[-1]
    a = a.reshape((-1, d, d))
    a = 0.5 * (a + a.conj().swapaxes(-1, -2))
    v = np.broadcast_to(np.eye(d, dtype=complex), a.shape).copy()

    scale = np.sqrt(np.sum(np.abs(a) ** 2, axis=(-1, -2)))
    thresh = tol * scale
    active = _off_norm(a) > thresh
    sweeps = 0
    while np.any(active):
        if sweeps >= max_sweeps:
            raise JacobiConvergenceError(float(np.max(_off_norm(a)[active])), sweeps)
        idx = np.flatnonzero(active)
        sub = a[idx]
        vec = v[idx]
        for p in range(d - 1):
            for q in range(p + 1, d):
                b = sub[:, p, q]
                absb = np.abs(b)
                app = sub[:, p, p].real
                aqq = sub[:, q, q].real
                nz = absb > 0.0
                safe = np.where(nz, absb, 1.0)
                theta = (aqq - app) / (2.0 * safe)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(nz, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                phase = np.where(nz, b / safe, 1.0)
                # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                g00 = c
                g01 = s
                g10 = -s * phase.conj()
                g11 = c * phase.conj()
                colp = sub[:, :, p].copy()
                colq = sub[:, :, q]
                sub[:, :, p] = colp * g00[:, None] + colq * g10[:, None]
                sub[:, :, q] = colp * g01[:, None] + colq * g11[:, None]
                rowp = sub[:, p, :].copy()
                rowq = sub[:, q, :]
                sub[:, p, :] = rowp * g00[:, None] + rowq * g10.conj()[:, None]
                sub[:, q, :] = rowp * g01[:, None] + rowq * g11.conj()[:, None]
                sub[:, p, q] = 0.0
                sub[:, q, p] = 0.0
                vp = vec[:, :, p].copy()
                vq = vec[:, :, q]
                vec[:, :, p] = vp * g00[:, None] + vq * g10[:, None]
                vec[:, :, q] = vp * g01[:, None] + vq * g11[:, None]
        a[idx] = sub
        v[idx] = vec
        sweeps += 1
        active = _off_norm(a) > thresh

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1))
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    return w.reshape(batch + (d,)), v.reshape(batch + (d, d))


def herm_eig(h) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvectors as columns.
    Within a degenerate cluster the basis is whatever the sweeps produce.
    """
    return jacobi_eigh(hermitian(h))


def lambda_max(h) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector for it."""
    w, v = herm_eig(h)
    return float(w[0]), v[:, 0]


def lambda_max_batch(hs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Top eigenpairs of a stack of Hermitian matrices ``(..., d, d)``."""
    w, v = jacobi_eigh(hs)
    return w[..., 0], v[..., :, 0]


def spectral_fn(h, f: Callable[[np.ndarray], np.ndarray], support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """Apply ``f`` to the spectrum of ``h`` restricted to its support.

    Eigenvalues with magnitude at or below ``support_tol * max(|lambda|)``
    are mapped to zero instead of being passed to ``f``.
    """
    w, v = herm_eig(h)
    cutoff = support_tol * max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    keep = np.abs(w) > cutoff
    fw = np.zeros_like(w)
    if np.any(keep):
        with np.errstate(all="raise"):
            try:
                vals = np.asarray(f(w[keep]), dtype=float)
            except FloatingPointError as exc:
                raise ValueError(f"function undefined on retained eigenvalue: {exc}") from None
        if not np.all(np.isfinite(vals)):
            raise ValueError("function undefined on retained eigenvalue")
        fw[keep] = vals
    out = (v * fw) @ v.conj().T
    return 0.5 * (out + out.conj().T)


def inv_sqrt(h, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    """rho^{-1/2} on the support of a PSD operator."""
    return spectral_fn(h, lambda w: 1.0 / np.sqrt(w), support_tol)


def sqrtm_psd(h, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    return spectral_fn(h, np.sqrt, support_tol)


def support_projector(h, support_tol: float = SUPPORT_TOL) -> np.ndarray:
    return spectral_fn(h, np.ones_like, support_tol)


def trace_product(a, b, tol: float = 1e-10) -> float:
    """Re tr(AB) for Hermitian A, B; the imaginary part must vanish."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    t = np.einsum("ij,ji->", a, b)
    if abs(t.imag) > tol:
        raise ValueError(f"tr(AB) has imaginary part {t.imag:.3e}; operands not Hermitian?")
    return float(t.real)


def projector(v) -> np.ndarray:
    """Rank-one projector |v><v| for a normalized vector."""
    v = pure_state(v)
    return np.outer(v, v.conj())
