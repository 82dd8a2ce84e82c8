import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from hwmopt import (
    InversionConfig,
    c1_price,
    derive_coefficients,
    first_passage_cdf,
    inception_call_transform,
    invert,
    lifetime_call_price,
    restricted_expectation,
)
from hwmopt.lifetime import TauSide

from conftest import table1


def test_first_passage_examples():
    assert first_passage_cdf(0.0, 1.0) == 1.0
    assert first_passage_cdf(1.0, 1.0) == pytest.approx(0.317311, abs=1e-6)
    assert first_passage_cdf(-1.0, 1.0) == first_passage_cdf(1.0, 1.0)
    assert first_passage_cdf(0.5, 1e-8) < 1e-300 + 1e-12
    with pytest.raises(ValueError):
        first_passage_cdf(1.0, 0.0)


@settings(max_examples=50, deadline=None)
@given(level=st.floats(-3, 3), u1=st.floats(0.01, 2), du=st.floats(0.0, 2))
def test_first_passage_is_a_cdf_in_time(level, u1, du):
    lo, hi = first_passage_cdf(level, u1), first_passage_cdf(level, u1 + du)
    assert 0.0 <= lo <= hi <= 1.0


def test_restricted_constant_weight():
    assert restricted_expectation(lambda x: 1.0, 1.0, 1.0) == pytest.approx(0.682689, abs=1e-6)
    assert restricted_expectation(lambda x: 1.0, 1.0, 1.0) == pytest.approx(1 - first_passage_cdf(1.0, 1.0), abs=1e-11)
    assert restricted_expectation(lambda x: 1.0, 0.0, 1.0) == 0.0


def _joint_density_oracle(h, level, u):
    """E[1{max W < level} h(W_u)] from the joint density of (max W, W_u), for level > 0."""

    def density(m, x):
        z = 2 * m - x
        return 2 * z / (u * math.sqrt(2 * math.pi * u)) * math.exp(-z * z / (2 * u))

    val, _ = integrate.dblquad(lambda m, x: density(m, x) * h(x), -12 * math.sqrt(u), level,
                               lambda x: max(0.0, x), lambda x: level, epsabs=1e-12, epsrel=1e-10)
    return val


@pytest.mark.parametrize("level,u", [(0.7, 1.0), (1.5, 0.5), (0.3, 2.0)])
def test_restricted_linear_weight_against_joint_density(level, u):
    ours = restricted_expectation(lambda x: x, level, u)
    assert ours == pytest.approx(_joint_density_oracle(lambda x: x, level, u), abs=1e-9)
    # mirror image for a negative level
    assert restricted_expectation(lambda x: -x, -level, u) == pytest.approx(ours, abs=1e-10)


@pytest.mark.parametrize("level", [0.4, -0.8])
def test_restricted_plus_complement_is_free_expectation(level):
    u = 0.8
    h = lambda x: math.exp(0.3 * x) * max(x + 0.1, 0.0)  # noqa: E731
    free, _ = integrate.quad(lambda x: h(x) * stats.norm.pdf(x, scale=math.sqrt(u)), -np.inf, np.inf, points=None)
    # E[1{tau <= u} h(W_u)]: reflected density below the level, free density beyond it
    if level > 0:
        hit = (integrate.quad(lambda x: h(x) * stats.norm.pdf(x - 2 * level, scale=math.sqrt(u)), -np.inf, level)[0]
               + integrate.quad(lambda x: h(x) * stats.norm.pdf(x, scale=math.sqrt(u)), level, np.inf)[0])
    else:
        hit = (integrate.quad(lambda x: h(x) * stats.norm.pdf(x - 2 * level, scale=math.sqrt(u)), level, np.inf)[0]
               + integrate.quad(lambda x: h(x) * stats.norm.pdf(x, scale=math.sqrt(u)), -np.inf, level)[0])
    assert restricted_expectation(h, level, u, points=(-0.1,)) + hit == pytest.approx(free, rel=1e-8)


def _c1_by_quadrature(params, s):
    """No-touch value through the restricted expectation with the density on the surviving paths."""
    c = derive_coefficients(params)
    spot, strike = params.spot, params.strike
    kink = (math.log(strike / spot) / c.sigma,) if strike > 0 else ()
    if c.d_h > 0:
        tilt, rate = c.b, c.rate + c.alpha_minus
    else:
        tilt, rate = c.b - 2 * c.lam, c.rate + c.alpha_plus
    h = lambda w: math.exp(tilt * w) * max(spot * math.exp(c.sigma * w) - strike, 0.0)  # noqa: E731
    return math.exp(-rate * s) * restricted_expectation(h, c.d_h, s, points=kink)


@pytest.mark.parametrize("hwm", [85.0, 95.0, 115.0, 130.0])
@pytest.mark.parametrize("strike", [0.0, 80.0, 90.0, 100.0, 110.0, 120.0])
@pytest.mark.parametrize("s", [0.25, 1.0])
def test_c1_closed_form_against_quadrature(hwm, strike, s):
    p = table1(hwm=hwm, strike=strike, maturity=s)
    closed = c1_price(p, derive_coefficients(p), p.spot, s)
    assert closed == pytest.approx(_c1_by_quadrature(p, s), rel=1e-7, abs=1e-9)


def test_c1_vanishes_when_strike_above_mark_below_spot_side():
    for strike in (115.0, 120.0):
        p = table1(hwm=115.0, strike=strike)
        assert c1_price(p, derive_coefficients(p), 100.0, 1.0) == 0.0


def test_c1_short_time_limit_is_intrinsic():
    p = table1(hwm=115.0, strike=90.0)
    assert c1_price(p, derive_coefficients(p), 100.0, 1e-7) == pytest.approx(10.0, abs=1e-3)
    q = table1(hwm=85.0, strike=90.0)
    assert c1_price(q, derive_coefficients(q), 100.0, 1e-7) == pytest.approx(10.0, abs=1e-3)


def test_c1_zero_on_the_mark():
    p = table1()
    assert c1_price(p, derive_coefficients(p), 100.0, 1.0) == 0.0


@pytest.mark.parametrize("strike", [90.0, 100.0, 110.0])
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_lifetime_meets_inception_on_the_mark(strike, sign):
    at = table1(strike=strike)
    inception = invert(inception_call_transform(at, derive_coefficients(at)), 1.0).value
    near = at.with_(high_water_mark=100.0 * (1 + sign * 1e-9))
    quote = lifetime_call_price(near, derive_coefficients(near), 100.0, 1.0)
    assert quote.value == pytest.approx(inception, abs=1e-6)
    exact = lifetime_call_price(at, derive_coefficients(at), 100.0, 1.0)
    assert exact.value == pytest.approx(inception, abs=1e-12)
    assert exact.diagnostics["split"].tau_side is TauSide.AT


@pytest.mark.parametrize("hwm,strike,s,published", [(85.0, 100.0, 1.0, 12.1470), (115.0, 110.0, 0.5, 3.7084)])
def test_lifetime_published_examples(hwm, strike, s, published):
    p = table1(hwm=hwm, strike=strike, maturity=s)
    quote = lifetime_call_price(p, derive_coefficients(p), 100.0, s)
    assert quote.value == pytest.approx(published, abs=0.01)
    split = quote.diagnostics["split"]
    assert split.c1_value + split.c2_value == pytest.approx(quote.value)
    assert split.tau_side is (TauSide.ABOVE if hwm > 100 else TauSide.BELOW)
    assert quote.diagnostics["within_tolerance"]


def test_lifetime_rejects_nonpositive_time():
    p = table1(hwm=90.0)
    with pytest.raises(ValueError):
        lifetime_call_price(p, derive_coefficients(p), 100.0, 0.0)


@settings(max_examples=20, deadline=None)
@given(hwm=st.floats(70.0, 130.0), strike=st.floats(70.0, 130.0))
def test_lifetime_price_within_static_bounds(hwm, strike):
    p = table1(hwm=hwm, strike=strike)
    c = derive_coefficients(p)
    call = lifetime_call_price(p, c, 100.0, 1.0).value
    q = p.with_(strike=0.0)
    fwd = lifetime_call_price(q, derive_coefficients(q), 100.0, 1.0, InversionConfig()).value
    assert -1e-7 <= call <= fwd + 1e-7
    assert call >= fwd - strike * math.exp(-0.02) - 1e-7
