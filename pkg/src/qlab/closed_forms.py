"""Analytic fidelity formulas and the B92-style tradeoff figures of merit.

All functions take and return plain floats. ``x`` is always the overlap
|<psi_0|psi_1>| of a pair of states.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

_SQRT2 = math.sqrt(2.0)
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

# Empirical fit for the angle of Shor's six-outcome trine measurement,
# sin^2(phi) ~ (1 - a) / (1 + 29.591 a); a numerical fit, not an identity.
SHOR_FIT_SLOPE = 29.591


def clone_fidelity(x: float) -> float:
    """Optimal 1 -> 2 cloning fidelity for two states with overlap x."""
    return 0.5 * (1.0 + x**3 + (1.0 - x * x) * math.sqrt(1.0 + x * x))


def helstrom_success(x: float) -> float:
    return 0.5 * (1.0 + math.sqrt(max(0.0, 1.0 - x * x)))


def two_state_accessible(theta: float, p_skew: float) -> float:
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    return 0.5 * (1.0 + math.sqrt(c2 + (p_skew**2 * c2 + s2) * s2))


def two_state_quantumness(x: float) -> float:
    return 0.5 * (1.0 + math.sqrt(1.0 - x * x + x**4))


def uniform_fidelity(d: int, nu: int) -> float:
    """Accessible fidelity of the unitarily invariant ensemble on H_d.

    ``nu`` is 1, 2 or 4 for real, complex or quaternionic amplitudes;
    evaluated through log-gamma so any d works.
    """
    if nu not in (1, 2, 4):
        raise ValueError(f"nu must be 1, 2 or 4, got {nu!r}")
    if d < 2:
        raise ValueError(f"need d >= 2, got {d!r}")
    a = nu * d / 2.0
    b = nu / 2.0
    log = math.lgamma(a) + math.lgamma(b + 2) - math.lgamma(b) - math.lgamma(a + 2)
    return d * math.exp(log)


def uniform_fidelity_table(d: int) -> tuple[float, float, float]:
    """(real, complex, quaternionic) values 3/(d+2), 2/(d+1), 3/(2d+1)."""
    return 3.0 / (d + 2), 2.0 / (d + 1), 3.0 / (2 * d + 1)


def trine_srm(alpha: float) -> float:
    """Square-root-measurement fidelity of the lifted trines."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    a = alpha
    lift = math.sqrt(a) * (1.0 - a) ** 1.5
    inner = (
        9.0
        - 24.0 * a
        + 126.0 * a**2
        - 200.0 * a**3
        + 105.0 * a**4
        + 4.0 * _SQRT2 * lift * (3.0 + 8.0 * a - 15.0 * a**2)
    )
    return (3.0 + a * a + 2.0 * _SQRT2 * lift + math.sqrt(max(0.0, inner))) / 8.0


def trine_angle_deg(alpha: float) -> float:
    """Angle between two lifted trine vectors, arccos of their overlap."""
    return math.degrees(math.acos((3.0 * alpha - 1.0) / 2.0))


def shor_fit_sin2phi(alpha: float) -> float:
    return (1.0 - alpha) / (1.0 + SHOR_FIT_SLOPE * alpha)


def b92_rate(x: float) -> float:
    """Unambiguous discrimination probability for two states."""
    return 1.0 - x


def trine_usd(alpha: float) -> float:
    """Unambiguous discrimination probability for the lifted trines."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    return 3.0 * alpha if alpha <= 1.0 / 3.0 else 1.5 * (1.0 - alpha)


def figure_of_merit_two_state(x: float) -> float:
    return b92_rate(x) * (1.0 - two_state_quantumness(x))


def figure_of_merit_trine(alpha: float) -> float:
    """Rate times security, assuming the SRM value is the trines' quantumness."""
    return trine_usd(alpha) * (1.0 - trine_srm(alpha))


def golden_section(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-10) -> tuple[float, float]:
    """Minimize a unimodal f on [lo, hi]; returns (argmin, min)."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    if fc <= fd:
        return c, fc
    return d, fd


def scalar_maximize(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = 10_001,
    xtol: float = 1e-10,
) -> tuple[float, float]:
    """Grid bracketing followed by golden-section refinement.

    Returns (argmax, max). The grid maximum is kept if refinement does not
    improve on it, which also covers maxima at the interval ends.
    """
    grid = np.linspace(lo, hi, points)
    vals = np.array([f(float(t)) for t in grid])
    i = int(np.argmax(vals))
    best_x, best_v = float(grid[i]), float(vals[i])
    a = float(grid[max(i - 1, 0)])
    b = float(grid[min(i + 1, points - 1)])
    x, negv = golden_section(lambda t: -f(t), a, b, xtol)
    if -negv > best_v:
        best_x, best_v = x, -negv
    return best_x, best_v


def scalar_minimize(f, lo, hi, points: int = 10_001, xtol: float = 1e-10) -> tuple[float, float]:
    x, v = scalar_maximize(lambda t: -f(t), lo, hi, points, xtol)
    return x, -v
