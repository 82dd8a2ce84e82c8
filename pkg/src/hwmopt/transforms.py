"""Laplace transforms in time to maturity of discounted call and forward prices.

Every transform here uses the kernel ``exp(-theta * t / 2)``; :mod:`hwmopt.inversion`
converts to the usual ``s = theta / 2`` variable. Evaluators accept numpy arrays
of complex ``theta`` and use principal-branch square roots, so they are valid
anywhere to the right of the handle's abscissa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from .model import Coefficients, FundParameters

# |q*m| below this switches (1 - exp(-q*m))/q to its Taylor series
_SERIES_CUTOFF = 1e-4


class DomainError(ValueError):
    """Transform evaluated where it is not defined (left of the abscissa, zero denominator)."""


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual estimate {residual:.3e})")


@dataclass(frozen=True)
class TransformHandle:
    """A transform ``theta -> F(theta)`` certified for ``Re(theta) > validity_abscissa``."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    validity_abscissa: float
    description: str = ""

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=complex)
        if np.any(theta.real <= self.validity_abscissa):
            raise DomainError(
                f"{self.description or 'transform'} evaluated at Re(theta)={theta.real.min():.6g} "
                f"<= abscissa {self.validity_abscissa:.6g}"
            )
        return self.evaluator(theta)

    def __add__(self, other: "TransformHandle") -> "TransformHandle":
        return combine([(1.0, self), (1.0, other)])


def combine(terms: Sequence[tuple[float, TransformHandle]]) -> TransformHandle:
    """Linear combination of handles; the abscissa is the largest of the parts."""
    terms = list(terms)

    def evaluator(theta):
        return sum(w * h.evaluator(theta) for w, h in terms)

    return TransformHandle(
        evaluator,
        max(h.validity_abscissa for _, h in terms),
        " + ".join(f"{w:g}*[{h.description}]" for w, h in terms),
    )


@dataclass(frozen=True)
class PayoffWeight:
    """``h(x) = exp(b*x - 2*lam*(x - d_h)+) * (spot*exp(sigma*x) - strike)+``."""

    spot: float
    strike: float
    b: float
    lam: float
    sigma: float
    d_h: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore"):
            weight = np.exp(self.b * x - 2.0 * self.lam * np.maximum(x - self.d_h, 0.0))
            payoff = np.maximum(self.spot * np.exp(self.sigma * x) - self.strike, 0.0)
        out = weight * payoff
        return float(out) if out.ndim == 0 else out

    @property
    def breakpoints(self) -> tuple[float, ...]:
        pts = [self.d_h]
        if self.strike > 0:
            pts.append(math.log(self.strike / self.spot) / self.sigma)
        return tuple(sorted(set(pts)))

    @property
    def growth(self) -> tuple[float, float]:
        """Exponential growth rates of ``h(x)`` and ``h(-x)`` as ``x -> +inf``."""
        up = self.sigma + self.b - 2.0 * self.lam
        down = -math.inf if self.strike > 0 else -(self.sigma + self.b)
        return up, down


def _sqrt_terms(theta, coeffs: Coefficients):
    rho_plus = np.sqrt(theta + 2.0 * (coeffs.rate + coeffs.alpha_plus))
    rho_minus = np.sqrt(theta + 2.0 * (coeffs.rate + coeffs.alpha_minus))
    return rho_plus, rho_minus


def _denominator(rho_plus, rho_minus, lam):
    return (rho_plus + rho_minus - 2.0 * lam) / 2.0


def _one_minus_exp_over(q, m: float):
    """``(1 - exp(-q*m)) / q`` with the removable point ``q = 0`` filled in."""
    q = np.asarray(q, dtype=complex)
    qm = q * m
    small = np.abs(qm) < _SERIES_CUTOFF
    safe_q = np.where(small, 1.0, q)
    direct = -np.expm1(-qm) / safe_q
    series = m * (1.0 - qm / 2.0 + qm**2 / 6.0 - qm**3 / 24.0)
    return np.where(small, series, direct)


def otm_numerator(theta, spot: float, strike: float, coeffs: Coefficients):
    """Numerator for ``spot <= strike``: ``N(theta)`` of the out-of-the-money transform."""
    sigma, b, lam = coeffs.sigma, coeffs.b, coeffs.lam
    rho_plus, _ = _sqrt_terms(theta, coeffs)
    q1 = rho_plus + 2.0 * lam - sigma - b
    q2 = rho_plus + 2.0 * lam - b
    log_moneyness = math.log(spot / strike)
    return (spot / q1) * np.exp(q1 * log_moneyness / sigma) - (strike / q2) * np.exp(q2 * log_moneyness / sigma)


def itm_numerator(theta, spot: float, strike: float, coeffs: Coefficients):
    """Numerator for ``spot >= strike``: ``N1(theta) + N2(theta)`` of the in-the-money transform."""
    sigma, b, lam = coeffs.sigma, coeffs.b, coeffs.lam
    rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
    n1 = spot / (rho_plus + 2.0 * lam - sigma - b) - strike / (rho_plus + 2.0 * lam - b)
    # (1 - (K/S)^(p/sigma)) / p == (1 - exp(-p*m)) / p with m = ln(S/K)/sigma
    m = math.log(spot / strike) / sigma
    n2 = spot * _one_minus_exp_over(rho_minus + sigma + b, m) - strike * _one_minus_exp_over(rho_minus + b, m)
    return n1 + n2


def call_numerator(theta, spot: float, strike: float, coeffs: Coefficients):
    if spot <= strike:
        return otm_numerator(theta, spot, strike, coeffs)
    return itm_numerator(theta, spot, strike, coeffs)


def forward_numerator(theta, spot: float, coeffs: Coefficients):
    sigma, b, lam = coeffs.sigma, coeffs.b, coeffs.lam
    rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
    return spot / (rho_plus + 2.0 * lam - sigma - b) + spot / (rho_minus + sigma + b)


def effective_abscissa(coeffs: Coefficients, *, forward: bool = False) -> float:
    """Smallest real theta right of which the closed forms are certified.

    Starts from the x-integrability bound carried by ``coeffs`` and raises it
    if needed so that both radicands and the denominator stay positive.
    """
    r = coeffs.rate
    bounds = [
        coeffs.validity_abscissa,
        -2.0 * (r + coeffs.alpha_plus),
        -2.0 * (r + coeffs.alpha_minus),
    ]
    if forward and coeffs.sigma + coeffs.b < 0:
        bounds.append((coeffs.sigma + coeffs.b) ** 2 - 2.0 * (r + coeffs.alpha_minus))
    lo = max(-2.0 * (r + coeffs.alpha_plus), -2.0 * (r + coeffs.alpha_minus))

    def denom(theta):
        return math.sqrt(theta + 2.0 * (r + coeffs.alpha_plus)) + math.sqrt(theta + 2.0 * (r + coeffs.alpha_minus)) - 2.0 * coeffs.lam

    if denom(lo) <= 0.0:
        hi = lo + 1.0
        while denom(hi) <= 0.0:
            hi = lo + 2.0 * (hi - lo)
        bounds.append(optimize.brentq(denom, lo, hi, xtol=1e-14))
    return max(bounds)


def inception_call_transform(params: FundParameters, coeffs: Coefficients, spot: float | None = None) -> TransformHandle:
    """Transform of the call price when the NAV sits on the high-water mark."""
    spot = params.spot if spot is None else spot
    strike = params.strike
    if strike <= 0:
        raise DomainError("inception call transform needs a positive strike; use forward_transform")
    if abs(coeffs.d_h) > 1e-12:
        raise DomainError(f"inception call transform needs d_h = 0, got {coeffs.d_h:.6g}")

    def evaluator(theta):
        rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
        return call_numerator(theta, spot, strike, coeffs) / _denominator(rho_plus, rho_minus, coeffs.lam)

    branch = "otm" if spot <= strike else "itm"
    return TransformHandle(evaluator, effective_abscissa(coeffs), f"inception call ({branch}) S={spot:g} K={strike:g}")


def forward_transform(params: FundParameters, coeffs: Coefficients, spot: float | None = None) -> TransformHandle:
    """Transform of the discounted forward ``exp(-r t) E[S_t]`` at inception."""
    spot = params.spot if spot is None else spot

    def evaluator(theta):
        rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
        return forward_numerator(theta, spot, coeffs) / _denominator(rho_plus, rho_minus, coeffs.lam)

    return TransformHandle(evaluator, effective_abscissa(coeffs, forward=True), f"forward S={spot:g}")


def passage_factor(theta, coeffs: Coefficients):
    """``M(theta)``: discount for reaching the mark from the current NAV."""
    rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
    d_h, b, lam = coeffs.d_h, coeffs.b, coeffs.lam
    if d_h > 0:
        # (H/S)^((b - rho_minus)/sigma)
        return np.exp(d_h * (b - rho_minus))
    if d_h < 0:
        # (S/H)^((2*lam - b - rho_plus)/sigma)
        return np.exp(-d_h * (2.0 * lam - b - rho_plus))
    return np.ones_like(rho_plus)


def c2_transform(params: FundParameters, coeffs: Coefficients, spot_at_t: float | None = None) -> TransformHandle:
    """Transform of the post-first-passage part of the lifetime call price.

    ``coeffs`` must have been derived at ``spot_at_t``. A zero strike gives
    the post-passage part of the forward.
    """
    spot_at_t = params.spot if spot_at_t is None else spot_at_t
    hwm, strike = params.high_water_mark, params.strike

    def evaluator(theta):
        rho_plus, rho_minus = _sqrt_terms(theta, coeffs)
        if strike > 0:
            num = call_numerator(theta, hwm, strike, coeffs)
        else:
            num = forward_numerator(theta, hwm, coeffs)
        return passage_factor(theta, coeffs) * num / _denominator(rho_plus, rho_minus, coeffs.lam)

    side = "H<=K" if hwm <= strike else "H>=K"
    return TransformHandle(
        evaluator,
        effective_abscissa(coeffs, forward=strike <= 0),
        f"post-passage call ({side}) H={hwm:g} S={spot_at_t:g} K={strike:g}",
    )


def excursion_kernel(
    h: Callable,
    lam: float,
    mu_occ: float,
    nu_occ: float,
    theta: float,
    *,
    points: Sequence[float] = (),
    growth: tuple[float, float] = (0.0, 0.0),
    rtol: float = 1e-12,
) -> float:
    """Quadrature form of the local-time / occupation-time Laplace identity.

    Computes ``2*(int_0^inf e^{-x*sqrt(theta+2mu)} h(x) dx + int_0^inf e^{-x*sqrt(theta+2nu)} h(-x) dx)
    / (sqrt(theta+2mu) + sqrt(theta+2nu) - 2*lam)``. ``growth`` gives the exponential
    growth rates of ``h(x)`` and ``h(-x)``; each integral is truncated where its
    integrand has decayed by ``e^-40`` relative to that envelope.
    """
    if theta + 2.0 * mu_occ <= 0 or theta + 2.0 * nu_occ <= 0:
        raise DomainError("theta + 2*mu and theta + 2*nu must be positive")
    rho_plus = math.sqrt(theta + 2.0 * mu_occ)
    rho_minus = math.sqrt(theta + 2.0 * nu_occ)
    denom = rho_plus + rho_minus - 2.0 * lam
    if denom <= 0:
        raise DomainError(f"non-positive denominator {denom:.6g}")

    def half_line(rho, rate, sign):
        decay = rho - rate
        if decay <= 0:
            raise DomainError(f"integrand does not decay: sqrt term {rho:.6g} <= growth {rate:.6g}")
        upper = 40.0 / decay
        inner = sorted(p for p in (sign * p for p in points) if 0.0 < p < upper)
        edges = [0.0, *inner, upper]
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(lambda x: math.exp(-x * rho) * h(sign * x), lo, hi,
                                    epsabs=0.0, epsrel=rtol, limit=400)
            total += val
            err += e
        if err > max(1e-10 * abs(total), 1e-300):
            raise QuadratureError("excursion kernel quadrature did not converge", err)
        return total

    upper_part = half_line(rho_plus, growth[0], 1.0)
    lower_part = half_line(rho_minus, growth[1] if math.isfinite(growth[1]) else 0.0, -1.0)
    return 2.0 * (upper_part + lower_part) / denom
