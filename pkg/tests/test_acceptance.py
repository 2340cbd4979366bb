"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from qlab import closed_forms as cf
from qlab.cli import haar_mc
from qlab.ensembles import (
    SOLIDS,
    bloch_state,
    haar_sample,
    lifted_trine,
    platonic,
    platonic_rotations,
    real_symmetric,
    sic_ensemble,
    two_state,
)
from qlab.fidelity import (
    achievable_fidelity,
    lambda_max_bound,
    srm_lower_bound,
    success_probability,
)
from qlab.measurements import (
    group_covariant,
    helstrom,
    identity_povm,
    random_rank_one,
    random_von_neumann,
    shor_trine,
    sic_povm,
    srm,
    validate,
    von_neumann,
    x_operator,
)
from qlab.optimizer import OptimizerConfig, accessible_fidelity, quantumness, sic_candidate_value, srm_alpha_scan

from conftest import random_ensemble


def verdict(label: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
    assert ok, detail


def test_ac01_two_state_oracle():
    rng = np.random.default_rng(71)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        theta = rng.uniform(0.05, math.pi - 0.05)
        p = rng.uniform(0.0, 0.9)
        value = accessible_fidelity(two_state(theta, p)).best_value
        worst = max(worst, abs(value - cf.two_state_accessible(theta, p)))
    elapsed = time.perf_counter() - start
    verdict("AC1 two-state oracle", worst <= 1e-6 and elapsed <= 60,
            f"max error {worst:.2e} over 20 pairs in {elapsed:.1f} s")


def test_ac02_two_state_quantumness():
    q = quantumness(two_state(math.pi / 4).states)
    ok = abs(q.value - 0.9330127) <= 1e-4 and np.max(np.abs(q.worst_priors - 0.5)) <= 1e-3
    verdict("AC2 two-state quantumness", ok, f"Q = {q.value:.7f} at priors {np.round(q.worst_priors, 6).tolist()}")


def test_ac03_real_symmetric():
    values = {m: accessible_fidelity(real_symmetric(m)).best_value for m in (3, 4, 5, 8)}
    opt_err = max(abs(v - 0.75) for v in values.values())
    rng = np.random.default_rng(91)
    ms = (3, 4, 5, 8)
    rand_err = max(
        abs(achievable_fidelity(real_symmetric(ms[k % 4]), random_rank_one(2, 3, rng, real=True)) - 0.75)
        for k in range(100)
    )
    verdict("AC3 real symmetric 3/4", opt_err <= 1e-7 and rand_err <= 1e-9,
            f"optimizer error {opt_err:.2e}, random real rank-1 POVM error {rand_err:.2e}")


def test_ac04_platonic():
    rng = np.random.default_rng(42)
    worst = 0.0
    for solid in SOLIDS:
        e = platonic(solid)
        rots = platonic_rotations(solid)
        values = [accessible_fidelity(e).best_value,
                  achievable_fidelity(e, group_covariant(bloch_state((0, 0, 1)), rots, len(rots)))]
        values += [achievable_fidelity(e, random_von_neumann(2, rng)) for _ in range(20)]
        worst = max(worst, max(abs(v - 2 / 3) for v in values))
    verdict("AC4 Platonic 2/3", worst <= 1e-7, f"max deviation {worst:.2e} over five solids")


def test_ac05_lifted_trines():
    e = lifted_trine(1 / 40)
    f_shor = achievable_fidelity(e, shor_trine(1 / 40))
    f_srm = srm_lower_bound(e)
    ok = abs(f_shor - 0.79999) <= 2e-4 and abs(f_srm - 0.84766) <= 1e-5 and abs(f_srm - cf.trine_srm(1 / 40)) <= 1e-10
    verdict("AC5 lifted trines", ok, f"F(Shor) = {f_shor:.6f}, F_SRM = {f_srm:.8f}, closed form {cf.trine_srm(1 / 40):.8f}")


def test_ac06_srm_alpha_scan():
    scan = srm_alpha_scan(np.linspace(0.0, 1.0, 2001))
    g_alpha, g_val = scan.global_min
    # refine the restricted minimum between the neighbouring grid points
    a0 = scan.restricted_min[0]
    alpha, val = cf.golden_section(cf.trine_srm, max(1 / 3, a0 - 5e-4), min(1.0, a0 + 5e-4), xtol=1e-10)
    angle = cf.trine_angle_deg(alpha)
    ok = (g_alpha == 0.0 and g_val == 0.75 and abs(val - 0.89682) <= 1e-4
          and abs(alpha - 0.78868) <= 5e-4 and abs(angle - 46.92) <= 0.05)
    verdict("AC6 SRM alpha scan", ok,
            f"global min {g_val} at alpha={g_alpha}; restricted min {val:.6f} at alpha={alpha:.6f}, angle {angle:.3f} deg")


def test_ac07_sic_candidate():
    errs = [abs(sic_candidate_value(d) - 2 / (d + 1)) for d in (2, 3)]
    verdict("AC7 SIC candidate", max(errs) <= 1e-10, f"errors {errs[0]:.1e} (d=2), {errs[1]:.1e} (d=3)")


def test_ac08_haar_monte_carlo():
    runs = {d: haar_mc(d, 50000, seed=2024) for d in (2, 3)}
    ok = all(abs(r["fidelity"] - r["expected"]) <= 3 * r["standard_error"] for r in runs.values())
    detail = "; ".join(f"d={d}: {r['fidelity']:.5f} +/- {r['standard_error']:.5f} (z={r['z_score']:.2f})"
                       for d, r in runs.items())
    verdict("AC8 Haar Monte Carlo", ok, detail)


def test_ac09_b92_tradeoff():
    x, t = cf.scalar_maximize(cf.figure_of_merit_two_state, 0.0, 1.0)
    a, ta = cf.scalar_maximize(cf.figure_of_merit_trine, 0.0, 1.0)
    angle = cf.trine_angle_deg(a)
    ok = (abs(x - 0.54807) <= 5e-4 and abs(t - 0.02514) <= 1e-4 and abs(a - 0.68535) <= 5e-4
          and abs(ta - 0.04105) <= 1e-4 and abs(angle - 58.13) <= 0.05)
    verdict("AC9 B92 tradeoff", ok,
            f"T(x) max {t:.6f} at x={x:.6f}; trine T max {ta:.6f} at alpha={a:.6f} ({angle:.3f} deg)")


def _built_in_ensembles():
    out = [two_state(t, p) for t, p in [(0.3, 0.0), (1.0, 0.5), (2.5, 0.2)]]
    out += [real_symmetric(m) for m in (3, 4, 5, 8)]
    out += [platonic(s) for s in SOLIDS]
    out += [lifted_trine(a) for a in (0.0, 1 / 40, 0.5, 0.78868, 1.0)]
    out += [sic_ensemble(2), sic_ensemble(3), haar_sample(2, 50, 3), haar_sample(3, 30, 4)]
    return out


def test_ac10_property_suites():
    rng = np.random.default_rng(10)
    failures = []

    for k in range(200):
        d = int(rng.integers(2, 5))
        e = random_ensemble(rng, int(rng.integers(2, 7)), d)
        p = random_rank_one(d, int(rng.integers(d, d * d + 1)), rng) if k % 2 else random_von_neumann(d, rng)
        if success_probability(e, p) > achievable_fidelity(e, p) + 1e-12:
            failures.append(f"P_s > F on pair {k}")

    for d in (2, 3, 5):
        e = random_ensemble(rng, 4, d)
        if achievable_fidelity(e, identity_povm(d)) != pytest.approx(lambda_max_bound(e), abs=1e-14):
            failures.append(f"identity POVM d={d}")

    cfg = OptimizerConfig(restarts=8)
    constructed = []
    for e in _built_in_ensembles():
        lam, srm_b = lambda_max_bound(e), srm_lower_bound(e)
        best = accessible_fidelity(e, cfg)
        constructed += [srm(e), best.best_povm]
        if not (lam <= srm_b + 1e-9 and srm_b <= best.best_value + 1e-9):
            failures.append(f"ordering chain: {lam}, {srm_b}, {best.best_value}")

    for _ in range(50):
        e = random_ensemble(rng, 2, 2)
        x = x_operator(e)
        for el in helstrom(e).elements:
            if np.max(np.abs(x @ el - el @ x)) > 1e-8:
                failures.append("Helstrom projector is not an X eigenprojector")
        constructed.append(helstrom(e))

    constructed += [identity_povm(3), sic_povm(2), sic_povm(3), shor_trine(0.025), von_neumann(np.eye(4))]
    for solid in SOLIDS:
        rots = platonic_rotations(solid)
        constructed.append(group_covariant(bloch_state((0, 0, 1)), rots, len(rots)))
    bad = [p for p in constructed if not validate(p).ok(1e-9)]
    if bad:
        failures.append(f"{len(bad)} constructed POVMs fail validation")

    verdict("AC10 property suites", not failures,
            "; ".join(failures) or f"all hold; {len(constructed)} constructed POVMs validated")
