"""Command-line front end.

Ensembles and measurements are named with a small grammar,
``name[:key=value,...]``, or given as a path to a JSON file::

    qlab eval --ensemble platonic:cube --povm vn:z
    qlab eval --ensemble trine:alpha=0.025 --povm shor
    qlab optimize --ensemble twostate:theta=0.7853981633974483,P=0
    qlab quantumness --states twostate:x=0.7071067811865476
    qlab scan t_two_state --csv t.csv
    qlab table
    qlab haar-mc --d 2 --n 50000 --seed 7
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__, closed_forms as cf
from .ensembles import (
    SOLIDS,
    Ensemble,
    bloch_state,
    haar_sample,
    lifted_trine,
    overlap_matrix,
    platonic,
    platonic_rotations,
    real_symmetric,
    sic_ensemble,
    solid_vertices,
    two_state,
)
from .fidelity import (
    achievable_fidelity,
    average_fidelity,
    joint_probabilities,
    lambda_max_bound,
    optimal_resynthesis,
    srm_lower_bound,
    success_probability,
)
from .measurements import (
    InvalidPovmError,
    Povm,
    group_covariant,
    helstrom,
    identity_povm,
    random_von_neumann,
    shor_trine,
    sic_povm,
    srm,
    validate,
    von_neumann,
)
from .optimizer import OptimizationReport, OptimizerConfig, accessible_fidelity, quantumness, sic_candidate_value

SIG_DIGITS = 12
_SRM_MAX_STATES = 2000
_POSTERIOR_MAX_STATES = 64
CHAIN_TOL = 1e-9


class SpecError(ValueError):
    """Malformed or unknown ensemble/POVM spec string."""


class CheckFailed(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class RunRecord:
    command: str
    parameters: dict
    results: dict
    seed: int | None
    tool_version: str = __version__
    wall_time_ms: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))


def fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def round_sig(obj):
    """Round every float in a JSON-like tree to SIG_DIGITS significant digits."""
    if isinstance(obj, float):
        return float(fmt(obj)) if math.isfinite(obj) else obj
    if isinstance(obj, (np.floating,)):
        return round_sig(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: round_sig(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return round_sig(obj.tolist())
    return obj


# spec strings -----------------------------------------------------------

def parse_spec(text: str) -> tuple[str, dict, list[str]]:
    """Split ``name:key=value,...`` into (name, keyword values, bare tokens)."""
    name, _, rest = text.partition(":")
    name = name.strip().lower()
    if not name:
        raise SpecError(f"empty spec {text!r}")
    kwargs: dict = {}
    bare: list[str] = []
    for token in filter(None, (t.strip() for t in rest.split(","))):
        if "=" in token:
            k, _, v = token.partition("=")
            kwargs[k.strip()] = v.strip()
        else:
            bare.append(token)
    return name, kwargs, bare


def _number(key: str, raw: str, kind=float):
    try:
        if kind is int:
            return int(raw)
        return float(raw)
    except ValueError:
        raise SpecError(f"{key}={raw!r} is not a valid {kind.__name__}") from None


def _take(kwargs: dict, allowed: dict, name: str) -> dict:
    unknown = set(kwargs) - set(allowed)
    if unknown:
        raise SpecError(f"unknown key(s) {sorted(unknown)} for {name!r}; allowed: {sorted(allowed)}")
    out = {}
    for key, kind in allowed.items():
        if key in kwargs:
            out[key] = kwargs[key] if kind is str else _number(key, kwargs[key], kind)
    return out


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise SpecError(f"no built-in or file named {path!r}") from None


def _looks_like_file(text: str) -> bool:
    return text.endswith(".json") or os.sep in text or Path(text).is_file()


def build_ensemble(text: str) -> tuple[Ensemble, dict]:
    """Ensemble plus the parameters that produced it (kept for POVM specs)."""
    if _looks_like_file(text):
        return Ensemble.from_dict(_load_json(text)), {"name": "file", "path": text}
    name, kw, bare = parse_spec(text)
    if name == "twostate":
        args = _take(kw, {"theta": float, "x": float, "P": float}, name)
        if "theta" in args and "x" in args:
            raise SpecError("give either theta or x, not both")
        theta = math.acos(args["x"]) if "x" in args else args.get("theta", math.pi / 4)
        e = two_state(theta, args.get("P", 0.0))
        return e, {"name": name, "theta": theta, "P": args.get("P", 0.0)}
    if name == "realsym":
        args = _take(kw, {"M": int}, name)
        return real_symmetric(args.get("M", 3)), {"name": name, **args}
    if name == "platonic":
        args = _take(kw, {"solid": str}, name)
        solid = args.get("solid") or (bare[0] if bare else None)
        if solid not in SOLIDS:
            raise SpecError(f"platonic needs a solid from {SOLIDS}, got {solid!r}")
        return platonic(solid), {"name": name, "solid": solid}
    if name == "trine":
        args = _take(kw, {"alpha": float}, name)
        if "alpha" not in args:
            raise SpecError("trine needs alpha=...")
        return lifted_trine(args["alpha"]), {"name": name, **args}
    if name == "sic":
        args = _take(kw, {"d": int}, name)
        return sic_ensemble(args.get("d", 2)), {"name": name, "d": args.get("d", 2)}
    if name == "haar":
        args = _take(kw, {"d": int, "n": int, "seed": int}, name)
        return haar_sample(args.get("d", 2), args.get("n", 1000), args.get("seed", 0)), {"name": name, **args}
    raise SpecError(f"unknown ensemble {name!r}")


_AXES = {"z": (0, 0, 1), "x": (1, 0, 0), "y": (0, 1, 0)}


def build_povm(text: str, ensemble: Ensemble, eparams: dict) -> Povm:
    if _looks_like_file(text):
        doc = _load_json(text)
        if "best_povm" in doc:
            return OptimizationReport.from_dict(doc).best_povm
        if "results" in doc and "report" in doc["results"]:
            return Povm.from_dict(doc["results"]["report"]["best_povm"])
        return Povm.from_dict(doc)
    name, kw, bare = parse_spec(text)
    d = ensemble.dim
    if name == "identity":
        _take(kw, {}, name)
        return identity_povm(d)
    if name == "vn":
        args = _take(kw, {"seed": int, "axis": str}, name)
        axis = args.get("axis") or (bare[0] if bare else None)
        if "seed" in args:
            return random_von_neumann(d, np.random.default_rng(args["seed"]))
        if axis in (None, "computational"):
            return von_neumann(np.eye(d))
        if axis in _AXES and d == 2:
            up = bloch_state(_AXES[axis])
            down = bloch_state(-np.asarray(_AXES[axis], float))
            return von_neumann([up, down])
        raise SpecError(f"vn axis {axis!r} needs d=2 and one of x, y, z (or 'computational')")
    if name == "helstrom":
        _take(kw, {}, name)
        return helstrom(ensemble)
    if name == "srm":
        _take(kw, {}, name)
        return srm(ensemble)
    if name == "shor":
        args = _take(kw, {"alpha": float}, name)
        alpha = args.get("alpha", eparams.get("alpha"))
        if alpha is None:
            raise SpecError("shor needs alpha=... unless the ensemble is a trine")
        return shor_trine(alpha)
    if name == "sic":
        args = _take(kw, {"d": int}, name)
        return sic_povm(args.get("d", d))
    if name == "covariant":
        args = _take(kw, {"solid": str, "nucleus": str}, name)
        solid = args.get("solid") or eparams.get("solid")
        if solid not in SOLIDS:
            raise SpecError("covariant needs solid=... unless the ensemble is platonic")
        nucleus = args.get("nucleus", "z")
        if nucleus == "vertex":
            e = bloch_state(solid_vertices(solid)[0])
        elif nucleus in _AXES:
            e = bloch_state(_AXES[nucleus])
        else:
            raise SpecError(f"nucleus must be x, y, z or vertex, got {nucleus!r}")
        rots = platonic_rotations(solid)
        return group_covariant(e, rots, len(rots))
    raise SpecError(f"unknown POVM {name!r}")


# commands ---------------------------------------------------------------

def _config(args) -> OptimizerConfig:
    return OptimizerConfig(
        max_outcomes=args.max_outcomes,
        restarts=args.restarts,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        seed=args.seed,
        prior_min_grid=getattr(args, "grid", 33),
        warm_start=not args.no_warm_start,
    )


def _bounds(e: Ensemble) -> dict:
    out = {"lambda_max_bound": lambda_max_bound(e)}
    out["srm_bound"] = srm_lower_bound(e) if len(e) <= _SRM_MAX_STATES else None
    return out


def cmd_eval(args) -> tuple[dict, dict]:
    e, eparams = build_ensemble(args.ensemble)
    p = build_povm(args.povm, e, eparams)
    if p.dim != e.dim:
        raise CheckFailed("dimension mismatch", {"ensemble_dim": e.dim, "povm_dim": p.dim})
    diag = validate(p)
    f = achievable_fidelity(e, p)
    strategy = optimal_resynthesis(e, p)
    ps = success_probability(e, p)
    res = {
        "achievable_fidelity": f,
        "success_probability": ps,
        **_bounds(e),
        "resynthesis_check": average_fidelity(e, strategy),
        "outcomes": len(p),
        "povm_psd_violation": diag.psd_violation,
        "povm_completeness_residual": diag.completeness_residual,
    }
    if len(e) <= _POSTERIOR_MAX_STATES:
        joint = joint_probabilities(e, p)
        rows = []
        for b, row in enumerate(joint):
            pb = float(row.sum())
            rows.append(
                {
                    "outcome": b,
                    "probability": pb,
                    "posterior": (row / pb).tolist() if pb > 1e-14 else None,
                    "guess": int(np.argmax(row)),
                }
            )
        res["posterior_table"] = rows
    if ps > f + CHAIN_TOL:
        raise CheckFailed("success probability exceeds achievable fidelity", res)
    return {"ensemble": eparams, "povm": args.povm}, res


def cmd_optimize(args) -> tuple[dict, dict]:
    e, eparams = build_ensemble(args.ensemble)
    cfg = _config(args)
    report = accessible_fidelity(e, cfg)
    res = {
        "accessible_fidelity": report.best_value,
        **_bounds(e),
        "success_probability_at_best": success_probability(e, report.best_povm),
        "converged": report.converged,
        "report": report.to_dict(),
    }
    chain = [res["lambda_max_bound"]]
    if res["srm_bound"] is not None:
        chain.append(res["srm_bound"])
    chain.append(report.best_value)
    if any(a > b + CHAIN_TOL for a, b in zip(chain, chain[1:])):
        raise CheckFailed("ordering lambda_max(rho) <= F_SRM <= F_opt violated", res)
    if not report.converged:
        print("warning: optimizer hit max_iters before rel_tol", file=sys.stderr)
    return {"ensemble": eparams, "config": asdict(cfg)}, res


def cmd_quantumness(args) -> tuple[dict, dict]:
    e, eparams = build_ensemble(args.states)
    cfg = _config(args)
    q = quantumness(e.states, cfg)
    res = {
        "quantumness": q.value,
        "worst_priors": q.worst_priors.tolist(),
        "evaluations": q.evaluations,
        "report": q.report.to_dict(),
    }
    if len(e) == 2:
        x = float(overlap_matrix(e)[0, 1])
        res["overlap"] = x
        res["closed_form"] = cf.two_state_quantumness(x)
    return {"states": eparams, "config": asdict(cfg)}, res


SCANS = {
    # name: (function, default range, maximize?, x label)
    "t_two_state": (cf.figure_of_merit_two_state, (0.0, 1.0), True, "x"),
    "t_trine": (cf.figure_of_merit_trine, (0.0, 1.0), True, "alpha"),
    "srm_trine": (cf.trine_srm, (1.0 / 3.0, 1.0), False, "alpha"),
    "q_two_state": (cf.two_state_quantumness, (0.0, 1.0), False, "x"),
}


def cmd_scan(args) -> tuple[dict, dict]:
    f, (lo, hi), maximize, label = SCANS[args.quantity]
    lo = lo if args.lo is None else args.lo
    hi = hi if args.hi is None else args.hi
    grid = np.linspace(lo, hi, args.points)
    rows = [[float(t), f(float(t))] for t in grid]
    search = cf.scalar_maximize if maximize else cf.scalar_minimize
    xbest, vbest = search(f, lo, hi)
    res = {
        "columns": [label, "value"],
        "rows": rows,
        ("argmax" if maximize else "argmin"): xbest,
        ("max" if maximize else "min"): vbest,
    }
    if args.quantity in ("t_trine", "srm_trine"):
        res["angle_deg"] = cf.trine_angle_deg(xbest)
    elif args.quantity == "t_two_state":
        res["angle_deg"] = math.degrees(math.acos(xbest))
    if args.quantity == "t_trine":
        res["note"] = "assumes the square-root-measurement fidelity equals the trine quantumness"
    if args.quantity == "srm_trine":
        res["global_min"] = list(cf.scalar_minimize(f, 0.0, 1.0))
    if args.csv:
        write_csv(args.csv, res["columns"], rows)
    return {"quantity": args.quantity, "lo": lo, "hi": hi, "points": args.points}, res


def write_csv(path: str, columns: list[str], rows: list[list[float]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    Path(path).write_text(buf.getvalue())


def _row(name, value, expected, tol):
    return {"quantity": name, "value": value, "expected": expected, "ok": abs(value - expected) <= tol}


def table_rows(cfg: OptimizerConfig | None = None) -> list[dict]:
    """Recompute the headline numbers; each row carries its own pass flag."""
    cfg = cfg or OptimizerConfig(restarts=8)
    rows = []
    cube = platonic("cube")
    zvn = von_neumann([bloch_state((0, 0, 1)), bloch_state((0, 0, -1))])
    f = achievable_fidelity(cube, zvn)
    rows.append(_row("achievable fidelity = optimal resynthesis fidelity (cube, z basis)", f,
                     average_fidelity(cube, optimal_resynthesis(cube, zvn)), 1e-12))
    trine = lifted_trine(1 / 40)
    facc = accessible_fidelity(trine, cfg).best_value
    rows.append({"quantity": "bounds: P_s <= F, lambda_max(rho) <= F_SRM <= F_acc (trine alpha=1/40)",
                 "value": facc, "expected": None,
                 "ok": success_probability(trine, srm(trine)) <= srm_lower_bound(trine) + CHAIN_TOL
                 and lambda_max_bound(trine) <= srm_lower_bound(trine) + CHAIN_TOL
                 and srm_lower_bound(trine) <= facc + CHAIN_TOL})
    rows.append(_row("two-state accessible fidelity, theta=pi/4, P=0", cf.two_state_accessible(math.pi / 4, 0.0),
                     0.5 * (1 + math.sqrt(0.75)), 1e-12))
    qx, qv = cf.scalar_minimize(cf.two_state_quantumness, 0.0, 1.0)
    rows.append(_row("two-state quantumness minimum", qv, 0.5 * (1 + math.sqrt(0.75)), 1e-10))
    rows.append(_row("two-state quantumness argmin x", qx, 1 / math.sqrt(2), 1e-6))
    rows.append(_row("M-ary real symmetric source, M=3", accessible_fidelity(real_symmetric(3), cfg).best_value,
                     0.75, 1e-7))
    for solid in SOLIDS:
        rots = platonic_rotations(solid)
        p = group_covariant(bloch_state((0, 0, 1)), rots, len(rots))
        rows.append(_row(f"Platonic {solid}, covariant POVM", achievable_fidelity(platonic(solid), p), 2 / 3, 1e-10))
    for d in range(2, 6):
        exact = cf.uniform_fidelity_table(d)
        for nu, label, val in zip((1, 2, 4), ("real", "complex", "quaternionic"), exact):
            rows.append(_row(f"uniform ensemble d={d} {label}", cf.uniform_fidelity(d, nu), val, 1e-12))
    rows.append(_row("lifted trine alpha=1/40, SRM", srm_lower_bound(trine), 0.84766, 1e-5))
    rows.append(_row("lifted trine alpha=1/40, SRM closed form", cf.trine_srm(1 / 40), srm_lower_bound(trine), 1e-10))
    rows.append(_row("lifted trine alpha=1/40, Shor POVM", achievable_fidelity(trine, shor_trine(1 / 40)), 0.79999, 2e-4))
    for d in (2, 3):
        rows.append(_row(f"SIC candidate d={d}", sic_candidate_value(d), 2 / (d + 1), 1e-10))
    return rows


def cmd_table(args) -> tuple[dict, dict]:
    rows = table_rows(OptimizerConfig(restarts=args.restarts, seed=args.seed))
    res = {"rows": rows, "all_ok": all(r["ok"] for r in rows)}
    if not res["all_ok"]:
        raise CheckFailed("table row(s) failed", res)
    return {}, res


def haar_mc(d: int, n: int, seed: int, povm: Povm | None = None) -> dict:
    """Fixed-measurement fidelity on a Haar sample with its standard error.

    The per-sample terms sum_b <psi|E_b|psi> |<phi_b|psi>|^2 average exactly
    to the achievable fidelity, so their spread gives the standard error.
    """
    e = haar_sample(d, n, seed)
    p = povm or von_neumann(np.eye(d))
    strategy = optimal_resynthesis(e, p)
    lik = np.real(np.einsum("ni,bij,nj->bn", e.states.conj(), p.elements, e.states))
    hits = np.abs(strategy.resynthesis.conj() @ e.states.T) ** 2
    per_sample = np.sum(lik * hits, axis=0)
    mean = float(per_sample.mean())
    se = float(per_sample.std(ddof=1) / math.sqrt(n))
    expected = 2.0 / (d + 1)
    return {
        "fidelity": mean,
        "achievable_fidelity": achievable_fidelity(e, p),
        "standard_error": se,
        "expected": expected,
        "z_score": (mean - expected) / se,
    }


def cmd_haar_mc(args) -> tuple[dict, dict]:
    probe = haar_sample(args.d, 2, 0)
    p = build_povm(args.povm, probe, {})
    res = haar_mc(args.d, args.n, args.seed, p)
    if abs(res["z_score"]) > 3:
        raise CheckFailed("Monte Carlo estimate more than 3 standard errors from 2/(d+1)", res)
    return {"d": args.d, "n": args.n, "povm": args.povm}, res


# argument parsing --------------------------------------------------------

def _default_seed() -> int:
    env = os.environ.get("QLAB_SEED")
    return int(env) if env else 0


def _add_optimizer_flags(p):
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--rel-tol", type=float, default=1e-9)
    p.add_argument("--max-outcomes", type=int, default=None, help="default d^2")
    p.add_argument("--no-warm-start", action="store_true", help="skip the square-root-measurement restart")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qlab", description="Accessible fidelity and quantumness of pure-state ensembles.")
    parser.add_argument("--version", action="version", version=f"qlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="write the JSON record here (default stdout)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default $QLAB_SEED or 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="achievable fidelity of a fixed POVM")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--povm", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("optimize", parents=[common], help="accessible fidelity by numerical search")
    p.add_argument("--ensemble", required=True)
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("quantumness", parents=[common], help="minimize accessible fidelity over priors")
    p.add_argument("--states", required=True, help="ensemble spec; its priors are ignored")
    p.add_argument("--grid", type=int, default=33, help="prior grid resolution for 2 or 3 states")
    _add_optimizer_flags(p)
    p.set_defaults(func=cmd_quantumness)

    p = sub.add_parser("scan", parents=[common], help="scan a closed-form tradeoff curve")
    p.add_argument("quantity", choices=sorted(SCANS))
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--csv", default=None, help="also write the grid as CSV")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("table", parents=[common], help="recompute the summary table")
    p.add_argument("--restarts", type=int, default=8)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("haar-mc", parents=[common], help="Monte Carlo check on Haar-random states")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, default=50000)
    p.add_argument("--povm", default="vn:computational")
    p.set_defaults(func=cmd_haar_mc)
    return parser


def _emit(record: RunRecord, out: str | None) -> None:
    text = record.to_json()
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    start = time.perf_counter()
    try:
        params, results = args.func(args)
    except CheckFailed as exc:
        diag = {"error": str(exc), "diagnostics": round_sig(exc.diagnostics)}
        print(json.dumps(diag, indent=2), file=sys.stderr)
        return 1
    except InvalidPovmError as exc:
        print(json.dumps({"error": str(exc), "diagnostics": asdict(exc.diagnostics)}, indent=2), file=sys.stderr)
        return 2
    except (SpecError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    record = RunRecord(
        command=args.command,
        parameters=round_sig(params),
        results=round_sig(results),
        seed=args.seed,
        wall_time_ms=int(round(1000 * (time.perf_counter() - start))),
    )
    _emit(record, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
