"""Numerical accessible fidelity and quantumness.

The accessible fidelity is maximized by alternating ascent over rank-one
POVMs. With the POVM fixed, the best resynthesis states are the top
eigenvectors of the mapping operators. With those states fixed the
fidelity is linear in the POVM, sum_b tr(E_b R_b), and the elements are
pushed uphill by the fixed-point map E_b -> R_b E_b R_b followed by the
S^{-1/2} (.) S^{-1/2} retraction back onto the POVM set. Because every
element stays rank one, only the vectors v_b with E_b = |v_b><v_b| are
stored, and all restarts are advanced together as one batch.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from . import closed_forms
from .ensembles import Ensemble, density_operator, lifted_trine, sic_ensemble
from .fidelity import Strategy, achievable_fidelity, optimal_resynthesis, srm_lower_bound
from .linalg import inv_sqrt, jacobi_eigh, lambda_max_batch
from .measurements import Povm, sic_povm

log = logging.getLogger(__name__)

PRUNE_WEIGHT = 1e-12
_RETRACT_CUTOFF = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    max_outcomes: int | None = None  # None means d**2
    restarts: int = 32
    max_iters: int = 2000
    rel_tol: float = 1e-9
    seed: int = 0
    prior_min_grid: int = 33
    warm_start: bool = True  # one extra restart seeded from the square-root measurement

    def __post_init__(self):
        if self.max_outcomes is not None and self.max_outcomes < 1:
            raise ValueError("max_outcomes must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.prior_min_grid < 2:
            raise ValueError("prior_min_grid must be >= 2")


@dataclass(frozen=True, eq=False)
class OptimizationReport:
    best_value: float
    best_povm: Povm
    best_strategy: Strategy
    per_restart_values: list[float]
    iterations_used: list[int]
    seed: int
    converged: bool
    best_restart: int = 0

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_restart": self.best_restart,
            "per_restart_values": list(self.per_restart_values),
            "iterations_used": list(self.iterations_used),
            "seed": self.seed,
            "converged": self.converged,
            "best_povm": self.best_povm.to_dict(),
            "resynthesis_re": self.best_strategy.resynthesis.real.tolist(),
            "resynthesis_im": self.best_strategy.resynthesis.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OptimizationReport":
        povm = Povm.from_dict(doc["best_povm"])
        resyn = np.asarray(doc["resynthesis_re"]) + 1j * np.asarray(doc["resynthesis_im"])
        return cls(
            best_value=doc["best_value"],
            best_povm=povm,
            best_strategy=Strategy(povm, resyn),
            per_restart_values=list(doc["per_restart_values"]),
            iterations_used=list(doc["iterations_used"]),
            seed=doc["seed"],
            converged=doc["converged"],
            best_restart=doc.get("best_restart", 0),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _batch_inv_sqrt(s: np.ndarray) -> np.ndarray:
    """S^{-1/2} on the support of each PSD matrix in a stack."""
    w, u = jacobi_eigh(s)
    cut = _RETRACT_CUTOFF * np.maximum(w[..., :1], np.finfo(float).tiny)
    keep = w > cut
    iw = np.where(keep, 1.0 / np.sqrt(np.where(keep, w, 1.0)), 0.0)
    return np.einsum("...ik,...k,...jk->...ij", u, iw, u.conj())


def _retract(w: np.ndarray) -> np.ndarray:
    """Map vectors (..., K, d) to a rank-one POVM on the span of the vectors."""
    s = np.einsum("...ki,...kj->...ij", w, w.conj())
    root = _batch_inv_sqrt(s)
    return np.einsum("...ij,...kj->...ki", root, w)


def _fidelities(states, priors, v):
    """Achievable fidelity and top eigenvectors for a batch of rank-one POVMs."""
    amp = np.einsum("ni,...ki->...kn", states.conj(), v)
    joint = priors * np.abs(amp) ** 2
    m = np.einsum("...kn,ni,nj->...kij", joint, states, states.conj())
    vals, vecs = lambda_max_batch(m)
    return np.clip(vals, 0.0, None).sum(axis=-1), vecs, amp


def _ascend(states, priors, v, max_iters, rel_tol):
    """Run the alternating ascent on a batch of starts ``v`` (R, K, d)."""
    r = v.shape[0]
    best_v = v.copy()
    best_f = np.full(r, -np.inf)
    prev = np.full(r, -np.inf)
    iters = np.full(r, max_iters)
    converged = np.zeros(r, dtype=bool)
    active = np.arange(r)
    for it in range(max_iters + 1):
        cur = v[active]
        f, phi, amp = _fidelities(states, priors, cur)
        better = f > best_f[active]
        best_f[active[better]] = f[better]
        best_v[active[better]] = cur[better]
        done = np.abs(f - prev[active]) <= rel_tol * np.maximum(np.abs(f), 1e-300)
        converged[active[done]] = True
        iters[active[done]] = it
        prev[active] = f
        keep = ~done
        if it == max_iters or not np.any(keep):
            break
        active, cur, phi, amp = active[keep], cur[keep], phi[keep], amp[keep]
        # R_b v_b = sum_n pi_n |<phi_b|psi_n>|^2 <psi_n|v_b> |psi_n>
        hit = priors * np.abs(np.einsum("ni,...ki->...kn", states.conj(), phi)) ** 2
        w = np.einsum("...kn,...kn,ni->...ki", hit, amp, states)
        v[active] = _retract(w)
    return best_v, best_f, iters, converged


def _finish(e: Ensemble, vecs: np.ndarray) -> Povm:
    """Prune tiny outcomes, re-retract, and complete the identity if needed."""
    weights = np.sum(np.abs(vecs) ** 2, axis=1)
    vecs = vecs[weights >= PRUNE_WEIGHT]
    vecs = _retract(vecs)
    s = np.einsum("ki,kj->ij", vecs, vecs.conj())
    els = np.einsum("ki,kj->kij", vecs, vecs.conj())
    w, u = jacobi_eigh(s)
    kern = u[:, w < 0.5]
    if kern.shape[1]:
        els = np.concatenate([els, (kern @ kern.conj().T)[None]])
    return Povm(els)


def _random_starts(d: int, k: int, cfg: OptimizerConfig) -> np.ndarray:
    starts = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        starts.append(rng.standard_normal((k, d)) + 1j * rng.standard_normal((k, d)))
    return _retract(np.array(starts))


def _srm_start(e: Ensemble) -> np.ndarray:
    root = inv_sqrt(density_operator(e))
    return np.sqrt(e.priors)[:, None] * (e.states @ root.T)


def accessible_fidelity(e: Ensemble, cfg: OptimizerConfig | None = None) -> OptimizationReport:
    """Maximize the achievable fidelity over POVMs with random restarts.

    Restart ``r`` draws its start from ``default_rng([seed, r])``; with
    ``warm_start`` one more restart (index ``restarts``) begins at the
    square-root measurement. The winner is the restart with the largest
    final value, lowest index on ties.
    """
    cfg = cfg or OptimizerConfig()
    d = e.dim
    k = cfg.max_outcomes or d * d
    states, priors = e.states, e.priors

    batches = [_random_starts(d, k, cfg)]
    if cfg.warm_start:
        batches.append(_srm_start(e)[None])

    finals: list[Povm] = []
    iters: list[int] = []
    conv: list[bool] = []
    for start in batches:
        best_v, _, it, ok = _ascend(states, priors, start.copy(), cfg.max_iters, cfg.rel_tol)
        finals.extend(_finish(e, bv) for bv in best_v)
        iters.extend(int(i) for i in it)
        conv.extend(bool(c) for c in ok)

    values = [achievable_fidelity(e, p) for p in finals]
    best = int(np.argmax(values))
    report = OptimizationReport(
        best_value=values[best],
        best_povm=finals[best],
        best_strategy=optimal_resynthesis(e, finals[best]),
        per_restart_values=values,
        iterations_used=iters,
        seed=cfg.seed,
        converged=conv[best],
        best_restart=best,
    )
    if not report.converged:
        log.warning("best restart hit max_iters=%d without meeting rel_tol", cfg.max_iters)
    return report


@dataclass(frozen=True, eq=False)
class QuantumnessResult:
    value: float
    worst_priors: np.ndarray
    report: OptimizationReport
    evaluations: int = 0
    trace: list[tuple[tuple[float, ...], float]] = field(default_factory=list, repr=False)


def _simplex_grid(k: int, steps: int):
    if k == 1:
        yield (steps,)
        return
    for i in range(steps + 1):
        for rest in _simplex_grid(k - 1, steps - i):
            yield (i,) + rest


def quantumness(states, cfg: OptimizerConfig | None = None) -> QuantumnessResult:
    """Minimize the accessible fidelity over prior distributions.

    This is a heuristic search: uniform priors first, then a simplex grid
    (two or three states only), then repeated golden-section line searches
    that move probability between pairs of states. The returned priors and
    report are the best point found, which can be checked independently.
    """
    cfg = cfg or OptimizerConfig()
    states = np.atleast_2d(np.asarray(states, dtype=complex))
    k = states.shape[0]
    if k < 2:
        raise ValueError("need at least two states")

    cache: dict[tuple[float, ...], float] = {}
    trace: list[tuple[tuple[float, ...], float]] = []

    def evaluate(p) -> float:
        p = np.clip(np.asarray(p, dtype=float), 0.0, None)
        p = p / p.sum()
        key = tuple(np.round(p, 15))
        if key not in cache:
            cache[key] = accessible_fidelity(Ensemble(p, states), cfg).best_value
            trace.append((key, cache[key]))
        return cache[key]

    best_p = np.full(k, 1.0 / k)
    best_v = evaluate(best_p)
    width = 1.0
    if k <= 3:
        steps = cfg.prior_min_grid - 1
        for idx in _simplex_grid(k, steps):
            p = np.asarray(idx, dtype=float) / steps
            v = evaluate(p)
            if v < best_v:
                best_p, best_v = p, v
        width = 1.0 / steps

    for _ in range(50):
        improved = False
        for i, j in combinations(range(k), 2):
            # move t from j to i; feasible t in [-p_i, p_j]
            lo = max(-best_p[i], -width)
            hi = min(best_p[j], width)
            if hi - lo <= 1e-12:
                continue

            def along(t, base=best_p, i=i, j=j):
                q = base.copy()
                q[i] += t
                q[j] -= t
                return evaluate(q)

            t, v = closed_forms.golden_section(along, lo, hi, xtol=1e-7)
            if v < best_v - 1e-13:
                q = best_p.copy()
                q[i] += t
                q[j] -= t
                best_p, best_v = np.clip(q, 0.0, None) / np.clip(q, 0.0, None).sum(), v
                improved = True
        if not improved:
            break

    report = accessible_fidelity(Ensemble(best_p, states), cfg)
    return QuantumnessResult(report.best_value, best_p, report, len(cache), trace)


def sic_candidate_value(d: int) -> float:
    """Achievable fidelity of the SIC ensemble measured with its own SIC POVM."""
    return achievable_fidelity(sic_ensemble(d), sic_povm(d))


@dataclass(frozen=True)
class AlphaScan:
    rows: list[tuple[float, float]]
    global_min: tuple[float, float]
    restricted_min: tuple[float, float] | None


def srm_alpha_scan(alpha_grid, check_tol: float = 1e-10) -> AlphaScan:
    """SRM fidelity of the lifted trines along a grid of lifting parameters.

    Each point is computed from the ensemble and checked against the closed
    form. The restricted minimum is over grid points with alpha >= 1/3.
    """
    rows = []
    for a in alpha_grid:
        a = float(a)
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {a!r}")
        numeric = srm_lower_bound(lifted_trine(a))
        exact = closed_forms.trine_srm(a)
        if abs(numeric - exact) > check_tol:
            raise ArithmeticError(f"SRM mismatch at alpha={a}: {numeric!r} vs {exact!r}")
        rows.append((a, numeric))
    gmin = min(rows, key=lambda r: r[1])
    upper = [r for r in rows if r[0] >= 1.0 / 3.0]
    rmin = min(upper, key=lambda r: r[1]) if upper else None
    return AlphaScan(rows, gmin, rmin)


def with_seed(cfg: OptimizerConfig, seed: int) -> OptimizerConfig:
    return replace(cfg, seed=seed)
