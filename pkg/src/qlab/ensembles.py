"""Pure-state ensembles: the built-in sources and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.spatial.transform import Rotation

from .linalg import NORM_TOL, fix_phase, normalize, projector

PRIOR_TOL = 1e-12

GOLDEN = (1.0 + np.sqrt(5.0)) / 2.0

SOLIDS = ("tetrahedron", "octahedron", "cube", "icosahedron", "dodecahedron")

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Prior probabilities ``priors[i]`` over pure states ``states[i]``.

    ``states`` has shape ``(n, d)``; row ``i`` is the state vector.
    """

    priors: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        priors = np.asarray(self.priors, dtype=float).ravel()
        states = np.atleast_2d(np.asarray(self.states, dtype=complex))
        if states.shape[0] != priors.size:
            raise ValueError(f"{priors.size} priors for {states.shape[0]} states")
        if priors.size < 2:
            raise ValueError("an ensemble needs at least two items")
        if np.any(priors < -PRIOR_TOL):
            raise ValueError(f"negative prior probability: {priors.min()!r}")
        total = priors.sum()
        if abs(total - 1.0) > PRIOR_TOL:
            raise ValueError(f"priors sum to {total!r}, not 1")
        norms = np.sum(np.abs(states) ** 2, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(f"state {bad} is not normalized (norm^2 = {norms[bad]!r})")
        priors = np.clip(priors, 0.0, None)
        priors = priors / priors.sum()
        priors.setflags(write=False)
        states = states.copy()
        states.setflags(write=False)
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "states", states)

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __len__(self) -> int:
        return self.priors.size

    def projectors(self) -> np.ndarray:
        return np.einsum("ni,nj->nij", self.states, self.states.conj())

    def with_priors(self, priors) -> "Ensemble":
        return Ensemble(priors, self.states)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "items": [
                {"prior": float(p), "state_re": s.real.tolist(), "state_im": s.imag.tolist()}
                for p, s in zip(self.priors, self.states)
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Ensemble":
        items = doc["items"]
        states = np.array(
            [np.asarray(it["state_re"], float) + 1j * np.asarray(it.get("state_im", 0.0), float) for it in items]
        )
        if states.ndim != 2 or states.shape[1] != doc["dim"]:
            raise ValueError(f"state length does not match dim={doc['dim']}")
        return cls([it["prior"] for it in items], states)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Ensemble":
        return cls.from_dict(json.loads(text))


def density_operator(e: Ensemble) -> np.ndarray:
    """rho = sum_i pi_i |psi_i><psi_i|."""
    rho = np.einsum("n,ni,nj->ij", e.priors, e.states, e.states.conj())
    return 0.5 * (rho + rho.conj().T)


def overlap_matrix(e: Ensemble) -> np.ndarray:
    """Matrix of |<psi_i|psi_j>|."""
    return np.abs(e.states.conj() @ e.states.T)


def uniform(states) -> Ensemble:
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    n = states.shape[0]
    return Ensemble(np.full(n, 1.0 / n), states)


def two_state(theta: float, p_skew: float = 0.0) -> Ensemble:
    """Two states at Hilbert-space angle theta with <psi_0|psi_1> = cos(theta).

    ``p_skew`` is pi_1 - pi_0, so the priors are ((1-P)/2, (1+P)/2).
    """
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
    if not 0.0 <= p_skew < 1.0:
        raise ValueError(f"p_skew must lie in [0, 1), got {p_skew!r}")
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    states = np.array([[c, -s], [c, s]], dtype=complex)
    return Ensemble([(1 - p_skew) / 2, (1 + p_skew) / 2], states)


def real_symmetric(m: int) -> Ensemble:
    """M equiprobable real qubit states (cos k pi/M, sin k pi/M)."""
    if m < 2:
        raise ValueError(f"need m >= 2, got {m}")
    k = np.arange(m) * np.pi / m
    return uniform(np.stack([np.cos(k), np.sin(k)], axis=1))


def bloch_state(r) -> np.ndarray:
    """Qubit state with unit Bloch vector r."""
    x, y, z = np.asarray(r, dtype=float) / np.linalg.norm(r)
    theta = np.arccos(np.clip(z, -1.0, 1.0))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bloch_vector(state) -> np.ndarray:
    p = projector(state)
    return np.real(np.einsum("kij,ji->k", PAULI, p))


def _cyclic(vs):
    out = []
    for v in vs:
        v = np.asarray(v, dtype=float)
        out.extend([v, np.roll(v, 1), np.roll(v, 2)])
    return out


def solid_vertices(solid: str) -> np.ndarray:
    """Unit vertex vectors of a Platonic solid in a standard orientation."""
    if solid == "tetrahedron":
        v = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    elif solid == "octahedron":
        v = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    elif solid == "cube":
        v = list(product((1, -1), repeat=3))
    elif solid == "icosahedron":
        v = _cyclic([(0, a, b * GOLDEN) for a in (1, -1) for b in (1, -1)])
    elif solid == "dodecahedron":
        v = list(product((1, -1), repeat=3))
        v += _cyclic([(0, a / GOLDEN, b * GOLDEN) for a in (1, -1) for b in (1, -1)])
    else:
        raise ValueError(f"unknown solid {solid!r}; expected one of {SOLIDS}")
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def platonic(solid: str) -> Ensemble:
    """Equiprobable qubit states at the vertices of a Platonic solid."""
    return uniform([bloch_state(r) for r in solid_vertices(solid)])


def solid_rotations(solid: str) -> np.ndarray:
    """Proper rotation group of a Platonic solid as 3x3 matrices.

    Found by mapping a fixed pair of vertices onto every vertex pair with
    the same opening angle and keeping the maps that permute the vertices.
    """
    verts = solid_vertices(solid)
    a = verts[0]
    dots = verts @ a
    j = int(np.argmax(np.where(np.abs(np.abs(dots) - 1) > 1e-9, dots, -2.0)))
    b = verts[j]
    ab = a @ b

    def frame(u, w):
        e1 = u
        e2 = w - (w @ u) * u
        e2 /= np.linalg.norm(e2)
        return np.stack([e1, e2, np.cross(e1, e2)], axis=1)

    base = frame(a, b)
    rots = []
    for u in verts:
        for w in verts:
            if abs(u @ w - ab) > 1e-9:
                continue
            r = frame(u, w) @ base.T
            img = verts @ r.T
            hit = np.abs(img @ verts.T - 1.0) < 1e-9
            if np.all(hit.sum(axis=1) == 1):
                rots.append(r)
    return np.array(rots)


def su2_from_rotation(r: np.ndarray) -> np.ndarray:
    """A 2x2 unitary U with U (n.sigma) U^dagger = (R n).sigma."""
    x, y, z, w = Rotation.from_matrix(r).as_quat()
    return w * np.eye(2) - 1j * (x * PAULI[0] + y * PAULI[1] + z * PAULI[2])


def platonic_rotations(solid: str) -> list[np.ndarray]:
    """The solid's rotation group as SU(2) matrices (one lift per rotation)."""
    return [su2_from_rotation(r) for r in solid_rotations(solid)]


def _weyl_heisenberg_orbit(fiducial) -> np.ndarray:
    d = len(fiducial)
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    out = []
    for a in range(d):
        for b in range(d):
            v = np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b) @ fiducial
            out.append(fix_phase(v))
    return np.array(out)


def sic_states(d: int) -> np.ndarray:
    """d^2 equiangular vectors with |<psi_i|psi_j>|^2 = 1/(d+1)."""
    if d == 2:
        states = np.array([fix_phase(bloch_state(r)) for r in solid_vertices("tetrahedron")])
    elif d == 3:
        states = _weyl_heisenberg_orbit(normalize([1, 1, 0]))
    else:
        raise ValueError(f"SIC sets are built in only for d in (2, 3), got {d}")
    gram = np.abs(states.conj() @ states.T) ** 2
    off = gram[~np.eye(d * d, dtype=bool)]
    err = np.max(np.abs(off - 1.0 / (d + 1)))
    if err > 1e-10:
        raise ArithmeticError(f"SIC construction failed the overlap check (error {err:.3e})")
    return states


def sic_ensemble(d: int) -> Ensemble:
    return uniform(sic_states(d))


def lifted_trine(alpha: float) -> Ensemble:
    """Three equiprobable vectors in C^3 lifted out of the plane by alpha."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    r, h = np.sqrt(1 - alpha), np.sqrt(alpha)
    s3 = np.sqrt(3) / 2
    return uniform(
        [
            [r, 0, h],
            [-0.5 * r, s3 * r, h],
            [-0.5 * r, -s3 * r, h],
        ]
    )


def haar_states(d: int, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_sample(d: int, n: int, seed: int) -> Ensemble:
    """n equiprobable Haar-random states in C^d, reproducible from the seed."""
    if n < 2:
        raise ValueError(f"need n >= 2 samples, got {n}")
    return uniform(haar_states(d, n, seed))
