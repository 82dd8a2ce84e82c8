import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from hwmopt import DomainError, c2_transform, derive_coefficients, excursion_kernel, forward_transform, inception_call_transform
from hwmopt.cli import random_params
from hwmopt.transforms import PayoffWeight, itm_numerator, otm_numerator

from conftest import table1


def handles():
    p = table1()
    c = derive_coefficients(p)
    yield "inception-otm", inception_call_transform(p.with_(strike=110.0), c)
    yield "inception-itm", inception_call_transform(p.with_(strike=90.0), c)
    yield "forward", forward_transform(p, c)
    for hwm in (85.0, 115.0):
        q = table1(hwm=hwm, strike=100.0)
        yield f"c2-{hwm:g}", c2_transform(q, derive_coefficients(q))


HANDLES = list(handles())


@pytest.mark.parametrize("name,handle", HANDLES, ids=[h[0] for h in HANDLES])
def test_real_positive_and_decreasing(name, handle):
    thetas = handle.validity_abscissa + np.array([0.01, 0.1, 1.0, 10.0, 100.0])
    values = np.array([handle(t).real for t in thetas])
    assert np.all(values > 0)
    assert np.all(np.diff(values) < 0)


@pytest.mark.parametrize("name,handle", HANDLES, ids=[h[0] for h in HANDLES])
def test_conjugate_symmetry(name, handle):
    theta = handle.validity_abscissa + 0.7 + 3.3j
    assert handle(theta.conjugate()) == pytest.approx(np.conj(handle(theta)), rel=1e-14)


@pytest.mark.parametrize("name,handle", HANDLES, ids=[h[0] for h in HANDLES])
def test_decays_at_infinity(name, handle):
    assert abs(handle(1e10)) < 1e-6 * abs(handle(handle.validity_abscissa + 1.0))


@pytest.mark.parametrize("name,handle", HANDLES, ids=[h[0] for h in HANDLES])
def test_left_of_abscissa_rejected(name, handle):
    with pytest.raises(DomainError):
        handle(handle.validity_abscissa - 1e-3)


@pytest.mark.parametrize("strike", [70.0, 100.0, 130.0])
def test_branches_meet_at_the_money(strike):
    p = table1(strike=strike)
    c = derive_coefficients(p)
    for theta in (c.validity_abscissa + 1.0, c.validity_abscissa + 1.0 + 2.0j):
        otm = otm_numerator(theta, strike, strike, c)
        itm = itm_numerator(theta, strike, strike, c)
        assert abs(otm - itm) <= 1e-12 * abs(otm)


@pytest.mark.parametrize("hwm", [85.0, 115.0])
def test_c2_continuous_when_mark_equals_strike(hwm):
    p = table1(hwm=hwm, strike=hwm)
    c = derive_coefficients(p)
    theta = c.validity_abscissa + 1.0
    at = c2_transform(p, c)(theta)
    below = c2_transform(p.with_(strike=hwm * (1 - 1e-12)), c)(theta)
    above = c2_transform(p.with_(strike=hwm * (1 + 1e-12)), c)(theta)
    assert abs(otm_numerator(theta, hwm, hwm, c) - itm_numerator(theta, hwm, hwm, c)) <= 1e-10 * abs(at)
    assert below == pytest.approx(at, rel=1e-10)
    assert above == pytest.approx(at, rel=1e-10)


def test_c2_collapses_to_inception_on_the_mark():
    p = table1(hwm=100.0, strike=95.0)
    c = derive_coefficients(p)
    for theta in (0.3, 2.0, 1.0 + 5.0j):
        assert c2_transform(p, c)(theta) == inception_call_transform(p, c)(theta)


def test_inception_requires_mark_and_strike():
    p = table1(hwm=90.0)
    with pytest.raises(DomainError):
        inception_call_transform(p, derive_coefficients(p))
    q = table1(strike=0.0)
    with pytest.raises(DomainError):
        inception_call_transform(q, derive_coefficients(q))


def test_handles_add_linearly():
    p = table1()
    c = derive_coefficients(p)
    f, g = inception_call_transform(p, c), forward_transform(p, c)
    theta = 1.5 + 0.5j
    assert (f + g)(theta) == pytest.approx(f(theta) + g(theta), rel=1e-14)


def _kernel_pair(params, shift):
    c = derive_coefficients(params)
    w = PayoffWeight(params.spot, params.strike, c.b, c.lam, c.sigma)
    theta = c.validity_abscissa + shift
    closed = inception_call_transform(params, c)(theta).real
    quad = excursion_kernel(w, c.lam, c.rate + c.alpha_plus, c.rate + c.alpha_minus, theta,
                            points=w.breakpoints, growth=w.growth)
    return closed, quad


@pytest.mark.parametrize("shift", [0.5, 1.0, 5.0])
@pytest.mark.parametrize("strike", [90.0, 100.0, 110.0])
def test_kernel_matches_closed_form_table1(strike, shift):
    closed, quad = _kernel_pair(table1(strike=strike), shift)
    assert quad == pytest.approx(closed, rel=1e-8)


def test_kernel_matches_closed_form_random_draws():
    rng = np.random.default_rng(5)
    for _ in range(4):
        p = random_params(rng)
        for shift in (0.5, 5.0):
            closed, quad = _kernel_pair(p, shift)
            assert quad == pytest.approx(closed, rel=1e-8)


@pytest.mark.parametrize("theta", [0.5, 2.0, 8.0])
def test_kernel_gaussian_weight_against_time_space_quadrature(theta):
    def h(x):
        return math.exp(-x * x)

    kernel = excursion_kernel(h, 0.0, 0.0, 0.0, theta)

    # integrate e^{-theta t/2} h(x) against the Gaussian density over (t, x)
    def integrand(x, t):
        return math.exp(-theta * t / 2 - x * x / (2 * t)) / math.sqrt(2 * math.pi * t) * h(x)

    oracle, _ = integrate.dblquad(integrand, 0.0, np.inf, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10)
    assert kernel == pytest.approx(oracle, rel=1e-7)
    # and the printed reduction 4/(2 sqrt(theta)) * int_0^inf exp(-x sqrt(theta) - x^2) dx
    half, _ = integrate.quad(lambda x: math.exp(-x * math.sqrt(theta) - x * x), 0, np.inf)
    assert kernel == pytest.approx(4 / (2 * math.sqrt(theta)) * half, rel=1e-10)


def test_kernel_zero_denominator():
    # sqrt(1) + sqrt(1) - 2*1 = 0
    with pytest.raises(DomainError):
        excursion_kernel(lambda x: math.exp(-x * x), 1.0, 0.0, 0.0, 1.0)


def test_kernel_negative_radicand():
    with pytest.raises(DomainError):
        excursion_kernel(lambda x: 1.0, 0.0, -1.0, 0.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(spot=st.floats(60.0, 140.0), strike=st.floats(60.0, 140.0), shift=st.floats(0.2, 20.0))
def test_inception_transform_positive_for_any_moneyness(spot, strike, shift):
    p = table1(strike=strike).with_(spot=spot, high_water_mark=spot)
    c = derive_coefficients(p)
    h = inception_call_transform(p, c)
    value = h(h.validity_abscissa + shift)
    assert value.real > 0 and abs(value.imag) < 1e-12 * value.real
