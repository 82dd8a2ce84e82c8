"""Pricing during the life of the option, when the NAV is off the high-water mark.

The discounted call splits on the first time ``tau`` the driving Brownian motion
(under the fee-free measure) reaches the mark level ``d_h``: paths that never
reach it before maturity have a closed form built from normal CDFs (``c1``),
the rest is priced through the post-passage transform (``c2``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import transforms
from .inversion import InversionConfig, invert
from .model import Coefficients, FundParameters, Method, PriceQuote


class TauSide(str, Enum):
    ABOVE = "barrier-above"
    BELOW = "barrier-below"
    AT = "at-barrier"


@dataclass(frozen=True)
class BarrierSplit:
    c1_value: float
    c2_value: float
    tau_side: TauSide


def norm_cdf(x):
    return special.ndtr(x)


def _cdf_diff(x: float, y: float) -> float:
    """``N(x) - N(y)`` without cancellation in the upper tail."""
    if x > 0 and y > 0:
        return float(special.ndtr(-y) - special.ndtr(-x))
    return float(special.ndtr(x) - special.ndtr(y))


def first_passage_cdf(level: float, u: float) -> float:
    """``P[tau_level <= u]`` for a standard Brownian motion started at zero."""
    if not u > 0:
        raise ValueError("u must be positive")
    return float(2.0 * special.ndtr(-abs(level) / math.sqrt(u)))


def restricted_expectation(h: Callable[[float], float], level: float, u: float, *, points=(), rtol: float = 1e-11) -> float:
    """``E[1{tau_level > u} h(W_u)]`` by quadrature of the reflection formula.

    Uses the difference of the free Gaussian integral and its image reflected
    about ``level``. ``points`` are kinks of ``h`` handed to the integrator.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    if level == 0:
        return 0.0
    root = math.sqrt(u)
    c = level / root
    # lower cut-off far in the Gaussian tail
    v_min = -40.0

    def gauss(v):
        return math.exp(-0.5 * v * v) / math.sqrt(2.0 * math.pi)

    def piecewise(f, lo, hi, kinks):
        inner = sorted(k for k in kinks if lo < k < hi)
        edges = [lo, *inner, hi]
        return sum(integrate.quad(f, a, b, epsabs=1e-15, epsrel=rtol, limit=400)[0] for a, b in zip(edges[:-1], edges[1:]))

    if level > 0:
        free = piecewise(lambda v: gauss(v) * h(v * root), v_min, c, [p / root for p in points])
        image = piecewise(lambda v: gauss(v) * h(v * root + 2 * level), v_min, -c,
                          [(p - 2 * level) / root for p in points])
    else:
        free = piecewise(lambda v: gauss(v) * h(-v * root), v_min, -c, [-p / root for p in points])
        image = piecewise(lambda v: gauss(v) * h(-v * root + 2 * level), v_min, c,
                          [(2 * level - p) / root for p in points])
    return free - image


def c1_price(params: FundParameters, coeffs: Coefficients, spot_at_t: float, s: float) -> float:
    """Discounted call value on paths that do not reach the mark before maturity."""
    if not s > 0:
        raise ValueError("time to maturity must be positive")
    d_h, d_k, b, lam, sigma = coeffs.d_h, coeffs.d_k, coeffs.b, coeffs.lam, coeffs.sigma
    r, strike, hwm = coeffs.rate, params.strike, params.high_water_mark
    rs = math.sqrt(s)
    if d_h == 0:
        return 0.0

    if d_h > 0:
        if strike >= hwm:
            return 0.0

        def bracket(beta):
            direct = _cdf_diff(d_h / rs - rs * beta, d_k / rs - rs * beta)
            image = _cdf_diff(-d_h / rs - rs * beta, (d_k - 2 * d_h) / rs - rs * beta)
            return direct - math.exp(2 * beta * d_h) * image

        g = (spot_at_t * math.exp(s * (b + sigma) ** 2 / 2) * bracket(b + sigma)
             - (strike * math.exp(s * b**2 / 2) * bracket(b) if strike > 0 else 0.0))
        return max(math.exp(-(r + coeffs.alpha_minus) * s) * g, 0.0)

    d1, d2 = (d_k, 2 * d_h - d_k) if strike > hwm else (d_h, d_h)

    def n_term(beta):
        return (norm_cdf(-d1 / rs + rs * beta)
                - math.exp(2 * beta * d_h) * norm_cdf(d2 / rs + rs * beta))

    beta = b - 2 * lam
    j = (spot_at_t * math.exp(s * (beta + sigma) ** 2 / 2) * n_term(beta + sigma)
         - (strike * math.exp(s * beta**2 / 2) * n_term(beta) if strike > 0 else 0.0))
    return max(math.exp(-(r + coeffs.alpha_plus) * s) * float(j), 0.0)


def lifetime_call_price(params: FundParameters, coeffs: Coefficients, spot_at_t: float, s: float,
                        config: InversionConfig = InversionConfig()) -> PriceQuote:
    """Call price at a date where the NAV may differ from the high-water mark.

    ``coeffs`` must be derived at ``spot_at_t``. A zero strike prices the
    discounted forward.
    """
    if not s > 0:
        raise ValueError("time to maturity must be positive")
    if coeffs.d_h == 0:
        if params.strike > 0:
            handle = transforms.inception_call_transform(params, coeffs, spot_at_t)
        else:
            handle = transforms.forward_transform(params, coeffs, spot_at_t)
        res = invert(handle, s, config)
        split = BarrierSplit(0.0, res.value, TauSide.AT)
        return PriceQuote(res.value, Method.LAPLACE_INVERSION, res.error_estimate,
                          {"split": split, "within_tolerance": res.within_tolerance})

    c1 = c1_price(params, coeffs, spot_at_t, s)
    res = invert(transforms.c2_transform(params, coeffs, spot_at_t), s, config)
    side = TauSide.ABOVE if coeffs.d_h > 0 else TauSide.BELOW
    split = BarrierSplit(c1, res.value, side)
    return PriceQuote(c1 + res.value, Method.LAPLACE_INVERSION, res.error_estimate,
                      {"split": split, "within_tolerance": res.within_tolerance})
