"""Bromwich inversion with Euler summation for transforms in the theta convention.

A handle ``F`` represents ``int_0^inf exp(-theta*u/2) f(u) du``; with ``s = theta/2``
the ordinary transform is ``F(2s)``. The trapezoidal rule on the vertical line
``Re(s) = gamma + A/(2t)`` gives an alternating series whose partial sums are
averaged binomially (Euler summation), see Abate & Whitt (1995).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .transforms import DomainError, TransformHandle


@dataclass(frozen=True)
class InversionConfig:
    """Parameters of the Euler-summation inversion.

    ``contour_shift`` is a guard distance, in theta units, kept between the
    transform's abscissa and the exponential damping used for the series;
    ``discretization`` is the Abate-Whitt ``A`` that puts the contour a further
    ``A/t`` (theta units) to the right. The aliasing error is about ``exp(-A)``
    times the size of the function.
    """

    contour_shift: float = 1.0
    series_terms: int = 50
    euler_terms: int = 12
    target_abs_tol: float = 1e-6
    discretization: float = 22.0

    def __post_init__(self):
        if not self.contour_shift > 0:
            raise ValueError("contour_shift must be positive")
        if not self.series_terms > self.euler_terms >= 1:
            raise ValueError("need series_terms > euler_terms >= 1")
        if not self.discretization > 0:
            raise ValueError("discretization must be positive")


class InversionResult(NamedTuple):
    value: float
    error_estimate: float
    within_tolerance: bool


def _binomial_weights(m: int) -> np.ndarray:
    return special.comb(m, np.arange(m + 1), exact=False) / 2.0**m


def invert(handle: TransformHandle, t: float, config: InversionConfig = InversionConfig()) -> InversionResult:
    """Recover ``f(t)`` from its theta-convention transform."""
    if not t > 0:
        raise ValueError(f"inversion time must be positive, got {t}")
    n, m, a = config.series_terms, config.euler_terms, config.discretization

    # damping in s units; everything right of it is inside the region of validity
    gamma = (handle.validity_abscissa + config.contour_shift) / 2.0
    k = np.arange(n + m + 2)
    s = gamma + (a + 2j * np.pi * k) / (2.0 * t)
    values = handle(2.0 * s)
    if not np.all(np.isfinite(values)):
        raise DomainError(f"non-finite transform value on the contour of {handle.description}")

    terms = (-1.0) ** k * values.real
    terms[0] *= 0.5
    partial = np.cumsum(terms)
    w = _binomial_weights(m)
    euler_n = w @ partial[n : n + m + 1]
    euler_next = w @ partial[n + 1 : n + m + 2]

    scale = math.exp(gamma * t + a / 2.0) / t
    value = scale * euler_n
    # truncation (successive Euler sums) plus the leading aliasing term
    err = scale * abs(euler_next - euler_n) + math.exp(-a) * abs(value)
    return InversionResult(float(value), float(err), bool(err <= config.target_abs_tol))


def transform_from_standard(func: Callable[[np.ndarray], np.ndarray], abscissa_s: float, description: str = "") -> TransformHandle:
    """Wrap an ordinary Laplace transform ``F(s)`` as a theta-convention handle."""
    return TransformHandle(lambda theta: func(theta / 2.0), 2.0 * abscissa_s, description)


@dataclass(frozen=True)
class KnownPair:
    name: str
    transform: Callable[[np.ndarray], np.ndarray]
    original: Callable[[float], float]
    abscissa: float

    def handle(self) -> TransformHandle:
        return transform_from_standard(self.transform, self.abscissa, self.name)


KNOWN_PAIRS = (
    KnownPair("exp(-u)", lambda s: 1.0 / (s + 1.0), lambda u: math.exp(-u), -1.0),
    KnownPair("u", lambda s: 1.0 / s**2, lambda u: u, 0.0),
    KnownPair("sqrt(u)", lambda s: 0.5 * math.sqrt(math.pi) / s**1.5, math.sqrt, 0.0),
    KnownPair("sin(u)", lambda s: 1.0 / (s**2 + 1.0), math.sin, 0.0),
    KnownPair("u^2 exp(-2u)", lambda s: 2.0 / (s + 2.0) ** 3, lambda u: u * u * math.exp(-2.0 * u), -2.0),
    KnownPair("erfc(1/(2 sqrt u))", lambda s: np.exp(-np.sqrt(s)) / s,
              lambda u: math.erfc(0.5 / math.sqrt(u)), 0.0),
)

SELF_TEST_TIMES = (1.0 / 12.0, 0.5, 1.0)
SELF_TEST_TOL = 1e-7


@dataclass
class SelfTestReport:
    tolerance: float
    rows: list[dict] = field(default_factory=list)

    @property
    def max_error(self) -> float:
        return max(r["abs_error"] for r in self.rows)

    @property
    def passed(self) -> bool:
        return self.max_error <= self.tolerance

    @property
    def flagged(self) -> list[dict]:
        return [r for r in self.rows if r["abs_error"] > self.tolerance]


def self_test(config: InversionConfig = InversionConfig(), times: Sequence[float] = SELF_TEST_TIMES,
              tolerance: float | None = None) -> SelfTestReport:
    """Invert each analytic pair at each time and report the worst error.

    ``tolerance`` defaults to 1e-7 and can be overridden through the
    ``HWM_OPT_SELFTEST_TOL`` environment variable.
    """
    if tolerance is None:
        tolerance = float(os.environ.get("HWM_OPT_SELFTEST_TOL", SELF_TEST_TOL))
    report = SelfTestReport(tolerance)
    for pair in KNOWN_PAIRS:
        handle = pair.handle()
        for t in times:
            res = invert(handle, t, config)
            exact = pair.original(t)
            report.rows.append({
                "pair": pair.name,
                "t": t,
                "exact": exact,
                "inverted": res.value,
                "abs_error": abs(res.value - exact),
                "error_estimate": res.error_estimate,
            })
    return report
