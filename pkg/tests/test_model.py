import math

import pytest
from hypothesis import given, settings, strategies as st

from hwmopt import FundParameters, HwmMode, ParameterError, derive_coefficients, validate
from hwmopt.model import check

from conftest import table1


def test_table1_coefficients():
    c = derive_coefficients(table1())
    assert c.b == pytest.approx(0.4, abs=1e-12)
    assert c.lam == pytest.approx(0.075, abs=1e-12)
    assert c.alpha_minus == pytest.approx(0.08, abs=1e-12)
    assert c.alpha_plus == pytest.approx(0.03125, abs=1e-12)
    assert c.validity_abscissa == pytest.approx(0.10, abs=1e-12)
    assert c.d_h == 0.0


def test_fee_free_degeneration():
    c = derive_coefficients(table1(incentive_fraction=0.0, mean_return=0.0))
    assert c.lam == 0.0
    assert c.alpha_plus == c.alpha_minus == pytest.approx(c.b**2 / 2)


def test_level_offsets():
    c = derive_coefficients(table1(hwm=115.0, strike=90.0))
    assert c.d_h == pytest.approx(math.log(1.15) / 0.2)
    assert c.d_k == pytest.approx(math.log(0.9) / 0.2)
    assert derive_coefficients(table1(strike=0.0)).d_k == -math.inf


def test_spot_override():
    c = derive_coefficients(table1(hwm=85.0), spot_at_valuation=85.0)
    assert c.d_h == 0.0


def test_validate_reports_each_violation():
    assert validate(table1()) == []
    assert "volatility must be positive" in validate(table1(volatility=0.0))
    assert "time to maturity must be positive" in validate(table1(valuation_offset=1.0))
    bad = validate(table1(volatility=-0.1, spot=-1.0, strike=-5.0))
    assert len(bad) == 3


def test_non_finite_rejected():
    assert validate(table1(rate=float("nan"))) == ["rate must be a finite number"]


def test_check_raises_with_violations():
    with pytest.raises(ParameterError) as info:
        check(table1(volatility=0.0))
    assert info.value.violations == ["volatility must be positive"]


def test_unknown_mode():
    assert any("hwm mode" in v for v in validate(table1(hwm_mode="weekly")))


def test_accruing_mode_drops_rate():
    fixed = derive_coefficients(table1())
    moving = derive_coefficients(table1(hwm_mode=HwmMode.ACCRUING))
    assert moving.rate == 0.0
    assert moving.b == pytest.approx(fixed.b - 0.02 / 0.2)


@settings(max_examples=60, deadline=None)
@given(
    sigma=st.floats(0.05, 0.8),
    alpha=st.floats(-0.1, 0.3),
    fee=st.floats(0.0, 0.05),
    a=st.floats(0.0, 0.5),
    mu=st.floats(0.0, 0.5),
    hwm=st.floats(50.0, 150.0),
)
def test_coefficient_identities(sigma, alpha, fee, a, mu, hwm):
    p = table1(volatility=sigma, excess_return=alpha, management_fee=fee, incentive_fraction=a,
               mean_return=mu, hwm=hwm)
    c = derive_coefficients(p)
    assert c.alpha_minus == pytest.approx(c.b**2 / 2)
    assert c.alpha_plus == pytest.approx((c.b - 2 * c.lam) ** 2 / 2)
    assert c.validity_abscissa == pytest.approx((sigma + c.b - 2 * c.lam) ** 2 - 2 * (c.rate + c.alpha_plus))
    assert c.d_h == pytest.approx(math.log(hwm / 100.0) / sigma)
    # pure: same inputs, same outputs
    assert derive_coefficients(p) == c


@settings(max_examples=40, deadline=None)
@given(rate=st.floats(-0.05, 0.1))
def test_modes_agree_when_rate_vanishes(rate):
    p = table1(rate=0.0)
    assert derive_coefficients(p) == derive_coefficients(p.with_(hwm_mode=HwmMode.ACCRUING))
    if rate != 0:
        assert derive_coefficients(p.with_(rate=rate)).rate == rate


def test_parameters_are_frozen():
    p = table1()
    with pytest.raises(Exception):
        p.spot = 3.0
    assert p.with_(spot=3.0).spot == 3.0 and p.spot == 100.0
    assert p.as_dict()["hwm_mode"] == "fixed"
