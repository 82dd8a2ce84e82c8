"""Contract and market parameters, derived coefficients and price quotes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any


class HwmMode(str, Enum):
    FIXED = "fixed"
    ACCRUING = "accruing"


class Method(str, Enum):
    CLOSED_FORM = "closed-form"
    LAPLACE_INVERSION = "laplace-inversion"
    MONTE_CARLO = "monte-carlo"
    PARITY = "parity"


class ParameterError(ValueError):
    """Raised when a parameter set violates one or more model invariants."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class FundParameters:
    """Inputs for one option on a fund NAV.

    All rates are decimals per year (0.02, not 2%). ``spot`` is the NAV
    observed at the valuation date ``valuation_offset``; ``maturity`` is the
    absolute expiry date, so the time to maturity is
    ``maturity - valuation_offset``.
    """

    spot: float
    high_water_mark: float
    strike: float
    maturity: float
    rate: float
    excess_return: float
    management_fee: float
    incentive_fraction: float
    mean_return: float
    volatility: float
    valuation_offset: float = 0.0
    hwm_mode: HwmMode = HwmMode.FIXED

    @property
    def time_to_maturity(self) -> float:
        return self.maturity - self.valuation_offset

    def with_(self, **changes: Any) -> "FundParameters":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {
            "spot": self.spot,
            "high_water_mark": self.high_water_mark,
            "strike": self.strike,
            "maturity": self.maturity,
            "rate": self.rate,
            "excess_return": self.excess_return,
            "management_fee": self.management_fee,
            "incentive_fraction": self.incentive_fraction,
            "mean_return": self.mean_return,
            "volatility": self.volatility,
            "valuation_offset": self.valuation_offset,
            "hwm_mode": HwmMode(self.hwm_mode).value,
        }


@dataclass(frozen=True)
class Coefficients:
    """Quantities derived from :class:`FundParameters`.

    ``b`` is the drift of ``ln(S)/sigma`` net of fees below the mark, ``lam``
    the local-time weight ``mu*a/(2*sigma)``, ``alpha_plus`` / ``alpha_minus``
    the killing rates above / below the mark, ``d_h`` and ``d_k`` the mark and
    strike in Brownian units, and ``rate`` the discount rate actually used in
    the transforms (zero in accruing mode).
    """

    b: float
    lam: float
    d_h: float
    d_k: float
    alpha_plus: float
    alpha_minus: float
    validity_abscissa: float
    rate: float
    sigma: float


@dataclass(frozen=True)
class PriceQuote:
    value: float
    method: Method
    error_estimate: float = 0.0
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict[str, Any]:
        return {
            "price": self.value,
            "method": Method(self.method).value,
            "error_estimate": self.error_estimate,
            "diagnostics": dict(self.diagnostics),
        }


def validate(params: FundParameters) -> list[str]:
    """Return every violated invariant; an empty list means the inputs are usable."""
    out = []
    numeric = {
        "spot": params.spot,
        "high_water_mark": params.high_water_mark,
        "strike": params.strike,
        "maturity": params.maturity,
        "rate": params.rate,
        "excess_return": params.excess_return,
        "management_fee": params.management_fee,
        "incentive_fraction": params.incentive_fraction,
        "mean_return": params.mean_return,
        "volatility": params.volatility,
        "valuation_offset": params.valuation_offset,
    }
    for name, value in numeric.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append(f"{name} must be a finite number")
    if out:
        return out

    if params.volatility <= 0:
        out.append("volatility must be positive")
    if params.spot <= 0:
        out.append("spot must be positive")
    if params.high_water_mark <= 0:
        out.append("high water mark must be positive")
    if params.strike < 0:
        out.append("strike must be non-negative")
    if params.valuation_offset < 0:
        out.append("valuation offset must be non-negative")
    if params.time_to_maturity <= 0:
        out.append("time to maturity must be positive")
    if not 0.0 <= params.incentive_fraction <= 1.0:
        out.append("incentive fraction must lie in [0, 1]")
    if params.management_fee < 0:
        out.append("management fee must be non-negative")
    try:
        HwmMode(params.hwm_mode)
    except ValueError:
        out.append(f"unknown hwm mode {params.hwm_mode!r}")
    return out


def check(params: FundParameters) -> FundParameters:
    violations = validate(params)
    if violations:
        raise ParameterError(violations)
    return params


def derive_coefficients(params: FundParameters, spot_at_valuation: float | None = None) -> Coefficients:
    """Compute the drift, local-time and killing-rate coefficients.

    In accruing mode the discount rate is removed from ``b`` and from the
    abscissa; callers are expected to pass the deflated spot.
    """
    spot = params.spot if spot_at_valuation is None else spot_at_valuation
    if not spot > 0:
        raise ParameterError(["spot at valuation must be positive"])
    sigma = params.volatility
    rate = 0.0 if HwmMode(params.hwm_mode) is HwmMode.ACCRUING else params.rate

    b = (rate + params.excess_return - params.management_fee - 0.5 * sigma**2) / sigma
    lam = params.mean_return * params.incentive_fraction / (2.0 * sigma)
    alpha_minus = b**2 / 2.0
    alpha_plus = 2.0 * lam**2 + b**2 / 2.0 - 2.0 * lam * b
    d_h = math.log(params.high_water_mark / spot) / sigma
    d_k = math.log(params.strike / spot) / sigma if params.strike > 0 else -math.inf
    abscissa = (sigma + b - 2.0 * lam) ** 2 - 2.0 * (rate + alpha_plus)

    values = (b, lam, d_h, alpha_plus, alpha_minus, abscissa)
    if not all(math.isfinite(v) for v in values):
        raise ParameterError([f"non-finite coefficient from inputs: b={b}, lam={lam}, d_h={d_h}, "
                              f"alpha_plus={alpha_plus}, alpha_minus={alpha_minus}"])
    return Coefficients(
        b=b,
        lam=lam,
        d_h=d_h,
        d_k=d_k,
        alpha_plus=alpha_plus,
        alpha_minus=alpha_minus,
        validity_abscissa=abscissa,
        rate=rate,
        sigma=sigma,
    )
