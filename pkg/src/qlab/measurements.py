"""POVMs and the named measurements."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .closed_forms import shor_fit_sin2phi
from .ensembles import Ensemble, density_operator, sic_states
from .linalg import fix_phase, herm_eig, inv_sqrt, jacobi_eigh, support_projector

POVM_TOL = 1e-9

# The fitted Shor angle is only claimed in the small-lift regime.
SHOR_ALPHA_MAX = 0.061


class InvalidPovmError(ValueError):
    def __init__(self, diagnostics: "PovmDiagnostics"):
        super().__init__(
            f"not a valid POVM: PSD violation {diagnostics.psd_violation:.3e}, "
            f"completeness residual {diagnostics.completeness_residual:.3e}"
        )
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class PovmDiagnostics:
    psd_violation: float
    completeness_residual: float

    def ok(self, tol: float = POVM_TOL) -> bool:
        return self.psd_violation <= tol and self.completeness_residual <= tol


def validate(elements) -> PovmDiagnostics:
    """PSD violation (-min eigenvalue, floored at 0) and ||sum E_b - I||_max."""
    if isinstance(elements, Povm):
        elements = elements.elements
    e = np.asarray(elements, dtype=complex)
    if e.ndim != 3 or e.shape[1] != e.shape[2] or e.shape[0] == 0:
        raise ValueError(f"expected a non-empty stack of square matrices, got shape {e.shape}")
    w, _ = jacobi_eigh(e)
    psd = max(0.0, -float(np.min(w)))
    resid = float(np.max(np.abs(e.sum(axis=0) - np.eye(e.shape[1]))))
    return PovmDiagnostics(psd, resid)


@dataclass(frozen=True, eq=False)
class Povm:
    """Measurement operators ``elements[b]`` of shape ``(k, d, d)``."""

    elements: np.ndarray

    def __post_init__(self):
        e = np.array(self.elements, dtype=complex)
        if e.ndim == 2:
            e = e[None]
        e = 0.5 * (e + e.conj().swapaxes(-1, -2))
        diag = validate(e)
        if not diag.ok():
            raise InvalidPovmError(diag)
        e.setflags(write=False)
        object.__setattr__(self, "elements", e)

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.elements.shape[0]

    def weights(self) -> np.ndarray:
        return np.real(np.trace(self.elements, axis1=1, axis2=2))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "elements": [{"re": m.real.tolist(), "im": m.imag.tolist()} for m in self.elements],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Povm":
        els = np.array([np.asarray(m["re"], float) + 1j * np.asarray(m.get("im", 0.0), float) for m in doc["elements"]])
        if els.ndim != 3 or els.shape[1:] != (doc["dim"], doc["dim"]):
            raise ValueError(f"element shape does not match dim={doc['dim']}")
        return cls(els)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Povm":
        return cls.from_dict(json.loads(text))


def rank_one(vectors) -> Povm:
    """POVM with elements |v_b><v_b| for unnormalized vectors v_b."""
    v = np.asarray(vectors, dtype=complex)
    v = np.array([fix_phase(x) for x in v])
    return Povm(np.einsum("bi,bj->bij", v, v.conj()))


def identity_povm(d: int) -> Povm:
    return Povm(np.eye(d)[None])


def von_neumann(basis) -> Povm:
    """Projective measurement onto an orthonormal basis (rows of ``basis``)."""
    b = np.atleast_2d(np.asarray(basis, dtype=complex))
    d = b.shape[1]
    if b.shape[0] != d:
        raise ValueError(f"need {d} basis vectors in dimension {d}, got {b.shape[0]}")
    err = np.max(np.abs(b.conj() @ b.T - np.eye(d)))
    if err > 1e-10:
        raise ValueError(f"basis is not orthonormal (Gram error {err:.3e})")
    return rank_one(b)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_von_neumann(d: int, rng: np.random.Generator) -> Povm:
    return von_neumann(random_unitary(d, rng).T)


def random_rank_one(d: int, k: int, rng: np.random.Generator, real: bool = False) -> Povm:
    """Random k-outcome rank-one POVM: Gaussian vectors squeezed to sum to I.

    With ``real`` the vectors (and hence the elements) are real.
    """
    if k < d:
        raise ValueError(f"a rank-one POVM on dimension {d} needs at least {d} outcomes, got {k}")
    v = rng.standard_normal((k, d)).astype(complex)
    if not real:
        v += 1j * rng.standard_normal((k, d))
    s = np.einsum("bi,bj->ij", v, v.conj())
    root = inv_sqrt(s)
    return rank_one(v @ root.T)


def _two_state_delta(e: Ensemble) -> np.ndarray:
    if len(e) != 2 or e.dim != 2:
        raise ValueError("needs a two-state qubit ensemble")
    p = e.projectors()
    return e.priors[0] * p[0] - e.priors[1] * p[1]


def helstrom(e: Ensemble) -> Povm:
    """Eigenprojectors of pi_0 Pi_0 - pi_1 Pi_1; outcome 0 favours psi_0."""
    delta = _two_state_delta(e)
    w, v = herm_eig(delta)
    if abs(w[0] - w[1]) < 1e-12:
        raise ValueError("Helstrom measurement undefined: Delta is degenerate")
    return rank_one(v.T)


def x_operator(e: Ensemble) -> np.ndarray:
    """Solve rho X + X rho = 2 Delta in the eigenbasis of rho."""
    delta = _two_state_delta(e)
    rho = density_operator(e)
    w, u = herm_eig(rho)
    if w[-1] <= 1e-12 * max(w[0], 1.0):
        raise ValueError("rho is singular; X is not defined")
    dl = u.conj().T @ delta @ u
    x = u @ (2.0 * dl / (w[:, None] + w[None, :])) @ u.conj().T
    return 0.5 * (x + x.conj().T)


def srm(e: Ensemble) -> Povm:
    """Square-root measurement pi_i rho^-1/2 Pi_i rho^-1/2.

    If rho is rank deficient, the projector onto its kernel is appended as
    one extra outcome so the elements resolve the full identity.
    """
    rho = density_operator(e)
    root = inv_sqrt(rho)
    vecs = np.sqrt(e.priors)[:, None] * (e.states @ root.T)
    els = np.einsum("bi,bj->bij", vecs, vecs.conj())
    kernel = np.eye(e.dim) - support_projector(rho)
    if np.max(np.abs(kernel)) > 1e-9:
        els = np.concatenate([els, kernel[None]])
    return Povm(els)


def shor_vectors(alpha: float) -> np.ndarray:
    s2 = shor_fit_sin2phi(alpha)
    x = np.sqrt(s2 / (1.0 - s2))
    c = np.sqrt(2.0 / 3.0 * (1.0 - 1.0 / (2.0 * x * x)))
    dd = np.sqrt(1.0 / (3.0 * x * x))
    s3 = np.sqrt(3) / 2
    return np.array(
        [
            c * np.array([0.0, 1.0, 0.0]),
            c * np.array([s3, 0.5, 0.0]),
            c * np.array([s3, -0.5, 0.0]),
            dd * np.array([1.0, 0.0, x]),
            dd * np.array([-0.5, s3, x]),
            dd * np.array([-0.5, -s3, x]),
        ]
    )


def shor_trine(alpha: float) -> Povm:
    """Six-outcome measurement for the lifted trines, small alpha only."""
    if not 0.0 < alpha < SHOR_ALPHA_MAX:
        raise ValueError(f"Shor POVM fit is only used for 0 < alpha < {SHOR_ALPHA_MAX}, got {alpha!r}")
    return rank_one(shor_vectors(alpha))


def sic_povm(d: int) -> Povm:
    return rank_one(sic_states(d) / np.sqrt(d))


def group_covariant(nucleus, rotations, group_order: int, merge_tol: float = 1e-9) -> Povm:
    """Qubit POVM (2/|G|) U_g |e><e| U_g^dagger over the supplied unitaries.

    Elements that coincide (e.g. when the nucleus sits on a symmetry axis)
    are merged into one outcome. Raises if the orbit does not resolve the
    identity, i.e. the unitaries are not a covariant-complete set for |e>.
    """
    us = np.asarray(rotations, dtype=complex)
    if us.shape[0] != group_order:
        raise ValueError(f"group_order={group_order} but {us.shape[0]} unitaries supplied")
    e = np.asarray(nucleus, dtype=complex)
    e = e / np.linalg.norm(e)
    vecs = np.einsum("gij,j->gi", us, e)
    els = (2.0 / group_order) * np.einsum("gi,gj->gij", vecs, vecs.conj())
    resid = float(np.max(np.abs(els.sum(axis=0) - np.eye(e.size))))
    if resid > 1e-8:
        raise ValueError(f"orbit of the nucleus does not resolve the identity (residual {resid:.3e})")
    merged: list[np.ndarray] = []
    for el in els:
        for m in merged:
            # proportional rank-one elements with the same support
            if np.max(np.abs(el / np.trace(el).real - m / np.trace(m).real)) < merge_tol:
                m += el
                break
        else:
            merged.append(el.copy())
    return Povm(np.array(merged))
