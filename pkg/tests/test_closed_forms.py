import math

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, gamma, mpf

from qlab import closed_forms as cf


@given(x=st.floats(0.0, 1.0))
def test_quantumness_range(x):
    q = cf.two_state_quantumness(x)
    assert 0.5 * (1 + math.sqrt(0.75)) - 1e-15 <= q <= 1.0


@given(theta=st.floats(0.0, math.pi), p=st.floats(0.0, 0.999))
def test_two_state_accessible_bounds(theta, p):
    f = cf.two_state_accessible(theta, p)
    assert 0.5 <= f <= 1.0 + 1e-15
    # the uniform-prior value is the smallest over the skew
    assert f >= cf.two_state_accessible(theta, 0.0) - 1e-15


def test_two_state_quantumness_is_accessible_at_equal_priors():
    for x in (0.0, 0.3, 0.9, 1.0):
        assert cf.two_state_quantumness(x) == pytest.approx(cf.two_state_accessible(math.acos(x), 0.0), abs=1e-14)


@pytest.mark.parametrize("d", range(2, 9))
def test_uniform_fidelity(d):
    for nu, exact in zip((1, 2, 4), cf.uniform_fidelity_table(d)):
        assert cf.uniform_fidelity(d, nu) == pytest.approx(exact, abs=1e-13)
        mp.dps = 30
        oracle = d * gamma(mpf(nu * d) / 2) * gamma(mpf(nu) / 2 + 2) / (gamma(mpf(nu) / 2) * gamma(mpf(nu * d) / 2 + 2))
        assert cf.uniform_fidelity(d, nu) == pytest.approx(float(oracle), abs=1e-13)


def test_uniform_fidelity_large_d():
    assert cf.uniform_fidelity(500, 2) == pytest.approx(2 / 501, rel=1e-10)
    with pytest.raises(ValueError):
        cf.uniform_fidelity(3, 3)


def test_trine_srm_endpoints():
    assert cf.trine_srm(0.0) == pytest.approx(0.75, abs=1e-15)
    assert cf.trine_srm(1.0) == pytest.approx(1.0, abs=1e-15)
    assert cf.trine_srm(1 / 3) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        cf.trine_srm(1.5)


def test_trine_usd():
    assert cf.trine_usd(1 / 3) == pytest.approx(1.0)
    assert cf.trine_usd(0.0) == 0.0
    assert cf.trine_usd(1.0) == 0.0


def test_golden_section_and_maximize():
    x, v = cf.golden_section(lambda t: (t - 0.3) ** 2, 0, 1)
    assert x == pytest.approx(0.3, abs=1e-8)
    x, v = cf.scalar_maximize(lambda t: t, 0, 1)
    assert (x, v) == (1.0, 1.0)
