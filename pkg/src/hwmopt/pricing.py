"""Entry points: calls, puts via parity, forwards, the accruing-mark variant and Merton."""

from __future__ import annotations

import math
import warnings

from scipy import special

from . import transforms
from .inversion import InversionConfig, invert
from .lifetime import lifetime_call_price
from .model import (
    FundParameters,
    HwmMode,
    Method,
    PriceQuote,
    check,
    derive_coefficients,
)

# beyond this the no-reset assumption of the model is questionable
RESET_HORIZON = 1.0


class ResetHorizonWarning(UserWarning):
    pass


def merton_reference(spot: float, strike: float, maturity: float, rate: float, dividend_yield: float,
                     volatility: float) -> float:
    """Black-Scholes-Merton call with a continuous dividend yield."""
    disc_spot = spot * math.exp(-dividend_yield * maturity)
    disc_strike = strike * math.exp(-rate * maturity)
    if strike <= 0:
        return disc_spot
    vol_t = volatility * math.sqrt(maturity)
    if vol_t <= 0:
        return max(disc_spot - disc_strike, 0.0)
    d1 = (math.log(disc_spot / disc_strike) + 0.5 * vol_t**2) / vol_t
    d2 = d1 - vol_t
    return float(disc_spot * special.ndtr(d1) - disc_strike * special.ndtr(d2))


def merton_put(spot, strike, maturity, rate, dividend_yield, volatility) -> float:
    call = merton_reference(spot, strike, maturity, rate, dividend_yield, volatility)
    return call - spot * math.exp(-dividend_yield * maturity) + strike * math.exp(-rate * maturity)


def _reset_check(params: FundParameters, diagnostics: dict) -> None:
    if params.time_to_maturity > RESET_HORIZON:
        diagnostics["reset_warning"] = True
        warnings.warn(
            f"time to maturity {params.time_to_maturity:g}y exceeds {RESET_HORIZON:g}y; "
            "the high-water mark is assumed never to reset",
            ResetHorizonWarning,
            stacklevel=3,
        )


def _fixed_mark_call(params: FundParameters, spot: float, config: InversionConfig) -> PriceQuote:
    """Call (or forward when the strike is zero) under the non-accruing fee rule on ``spot``."""
    coeffs = derive_coefficients(params, spot)
    s = params.time_to_maturity
    if coeffs.d_h == 0.0:
        if params.strike > 0:
            handle = transforms.inception_call_transform(params, coeffs, spot)
        else:
            handle = transforms.forward_transform(params, coeffs, spot)
        res = invert(handle, s, config)
        return PriceQuote(res.value, Method.LAPLACE_INVERSION, res.error_estimate,
                          {"route": "inception", "within_tolerance": res.within_tolerance})
    quote = lifetime_call_price(params, coeffs, spot, s, config)
    quote.diagnostics["route"] = "lifetime"
    return quote


def price_call(params: FundParameters, config: InversionConfig = InversionConfig()) -> PriceQuote:
    """Call price at ``params.valuation_offset``; a zero strike returns the discounted forward."""
    check(params)
    if HwmMode(params.hwm_mode) is HwmMode.ACCRUING:
        return price_moving_hwm_call(params, config)
    quote = _fixed_mark_call(params, params.spot, config)
    _reset_check(params, quote.diagnostics)
    return quote


def price_forward(params: FundParameters, config: InversionConfig = InversionConfig()) -> PriceQuote:
    """Discounted forward ``exp(-r(T-t)) E[S_T | S_t]``."""
    return price_call(params.with_(strike=0.0), config)


def price_moving_hwm_call(params: FundParameters, config: InversionConfig = InversionConfig()) -> PriceQuote:
    """Call with payoff ``(S_T - K exp(rT))+`` when the mark accrues at the riskless rate.

    The deflated NAV ``S_t exp(-rt)`` follows the fixed-mark dynamics with a
    zero rate, so the fixed-mark pipeline is run at ``r = 0`` on it and scaled
    back by ``exp(rt)``.
    """
    check(params)
    if HwmMode(params.hwm_mode) is not HwmMode.ACCRUING:
        raise ValueError("price_moving_hwm_call needs hwm_mode='accruing'")
    t = params.valuation_offset
    growth = math.exp(params.rate * t)
    deflated = params.spot / growth
    quote = _fixed_mark_call(params, deflated, config)
    _reset_check(params, quote.diagnostics)
    return PriceQuote(quote.value * growth, quote.method, quote.error_estimate * growth,
                      {**quote.diagnostics, "deflated_spot": deflated})


def discounted_strike(params: FundParameters) -> float:
    s = params.time_to_maturity
    if HwmMode(params.hwm_mode) is HwmMode.ACCRUING:
        # strike is K exp(rT) in this mode
        return params.strike * math.exp(params.rate * params.maturity - params.rate * s)
    return params.strike * math.exp(-params.rate * s)


def price_put(params: FundParameters, config: InversionConfig = InversionConfig()) -> PriceQuote:
    """Put through call-put parity: ``P = C - F + K exp(-r(T-t))``."""
    check(params)
    if params.strike == 0:
        return PriceQuote(0.0, Method.PARITY, 0.0, {"call": 0.0, "forward": None})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResetHorizonWarning)
        call = price_call(params, config)
        forward = price_forward(params, config)
    diagnostics = {"call": call.value, "forward": forward.value, "discounted_strike": discounted_strike(params)}
    _reset_check(params, diagnostics)
    value = call.value - forward.value + diagnostics["discounted_strike"]
    return PriceQuote(value, Method.PARITY, call.error_estimate + forward.error_estimate, diagnostics)
