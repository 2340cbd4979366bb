"""Fidelity quantities for a fixed measurement.

For an ensemble {pi_i, |psi_i>} and POVM {E_b}, Eve reports outcome b and
Yves prepares |phi_b>. The best Yves can do for a given POVM is the top
eigenvector of the mapping operator M_b = sum_i pi_i <psi_i|E_b|psi_i> Pi_i,
so the achievable fidelity is sum_b lambda_max(M_b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import Ensemble, density_operator
from .linalg import inv_sqrt, lambda_max, lambda_max_batch
from .measurements import Povm, srm

ZERO_PROB = 1e-14
_CLAMP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Strategy:
    """A measurement plus one resynthesis state per outcome (rows of ``resynthesis``)."""

    povm: Povm
    resynthesis: np.ndarray

    def __post_init__(self):
        r = np.atleast_2d(np.asarray(self.resynthesis, dtype=complex))
        if r.shape != (len(self.povm), self.povm.dim):
            raise ValueError(f"need {len(self.povm)} resynthesis states of dim {self.povm.dim}, got {r.shape}")
        object.__setattr__(self, "resynthesis", r)


def _check_dims(e: Ensemble, p: Povm):
    if e.dim != p.dim:
        raise ValueError(f"dimension mismatch: ensemble d={e.dim}, POVM d={p.dim}")


def _clamp(value: float) -> float:
    if value < -_CLAMP_TOL or value > 1 + _CLAMP_TOL:
        raise ArithmeticError(f"fidelity {value!r} outside [0, 1]")
    return min(1.0, max(0.0, float(value)))


def joint_probabilities(e: Ensemble, p: Povm) -> np.ndarray:
    """p(b, i) = pi_i <psi_i|E_b|psi_i>, shape (outcomes, inputs)."""
    _check_dims(e, p)
    lik = np.real(np.einsum("ni,bij,nj->bn", e.states.conj(), p.elements, e.states))
    return np.clip(lik, 0.0, None) * e.priors[None, :]


def mapping_operators(e: Ensemble, p: Povm) -> np.ndarray:
    """Stack of M_b, shape (outcomes, d, d)."""
    joint = joint_probabilities(e, p)
    m = np.einsum("bn,ni,nj->bij", joint, e.states, e.states.conj())
    return 0.5 * (m + m.conj().swapaxes(-1, -2))


def achievable_fidelity(e: Ensemble, p: Povm) -> float:
    vals, _ = lambda_max_batch(mapping_operators(e, p))
    return _clamp(np.sum(np.clip(vals, 0.0, None)))


def optimal_resynthesis(e: Ensemble, p: Povm) -> Strategy:
    _, vecs = lambda_max_batch(mapping_operators(e, p))
    return Strategy(p, vecs)


def average_fidelity(e: Ensemble, s: Strategy) -> float:
    """sum_{b,i} pi_i tr(Pi_i E_b) |<phi_b|psi_i>|^2."""
    joint = joint_probabilities(e, s.povm)
    hits = np.abs(s.resynthesis.conj() @ e.states.T) ** 2
    return _clamp(np.sum(joint * hits))


def posterior(e: Ensemble, p: Povm, outcome_index: int) -> np.ndarray:
    """Bayes posterior p(i|b) over the inputs for one outcome."""
    row = joint_probabilities(e, p)[outcome_index]
    total = row.sum()
    if total <= ZERO_PROB:
        raise ValueError(f"outcome {outcome_index} has zero probability")
    return row / total


def guesses(e: Ensemble, p: Povm) -> np.ndarray:
    """Maximum-likelihood input for each outcome; ties go to the lowest index."""
    return np.argmax(joint_probabilities(e, p), axis=1)


def success_probability(e: Ensemble, p: Povm) -> float:
    """P_s = sum_b max_i pi_i tr(Pi_i E_b)."""
    return _clamp(np.sum(np.max(joint_probabilities(e, p), axis=1)))


def lambda_max_bound(e: Ensemble) -> float:
    """lambda_max(rho), the fidelity of measuring nothing and resending the top eigenvector."""
    return lambda_max(density_operator(e))[0]


def srm_lower_bound(e: Ensemble) -> float:
    """sum_i lambda_max(sum_j pi_i pi_j Pi_j rho^-1/2 Pi_i rho^-1/2 Pi_j).

    Uses Pi_j A Pi_j = <psi_j|A|psi_j> Pi_j, so only the Gram matrix of
    rho^-1/2 between the states is needed.
    """
    root = inv_sqrt(density_operator(e))
    gram = np.abs(e.states.conj() @ root @ e.states.T) ** 2
    weights = e.priors[:, None] * e.priors[None, :] * gram.T
    ops = np.einsum("ij,ja,jb->iab", weights, e.states, e.states.conj())
    vals, _ = lambda_max_batch(0.5 * (ops + ops.conj().swapaxes(-1, -2)))
    return _clamp(np.sum(np.clip(vals, 0.0, None)))


def srm_fidelity(e: Ensemble) -> float:
    """Achievable fidelity of the square-root measurement, via the POVM route."""
    return achievable_fidelity(e, srm(e))


def mix(p: Povm, q: Povm, weight: float, aligned: bool = True) -> Povm:
    """Convex combination weight*p + (1-weight)*q.

    ``aligned`` adds elements outcome by outcome (the shorter list is padded
    with zeros); otherwise the two outcome sets are kept side by side.
    """
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight!r}")
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    a, b = weight * p.elements, (1 - weight) * q.elements
    if not aligned:
        return Povm(np.concatenate([a, b]))
    k = max(len(a), len(b))
    out = np.zeros((k, p.dim, p.dim), dtype=complex)
    out[: len(a)] += a
    out[: len(b)] += b
    return Povm(out)
