"""European options on fund NAVs whose manager charges high-water-mark incentive fees."""

from .inversion import InversionConfig, invert, self_test
from .lifetime import c1_price, first_passage_cdf, lifetime_call_price, restricted_expectation
from .model import (
    Coefficients,
    FundParameters,
    HwmMode,
    Method,
    ParameterError,
    PriceQuote,
    derive_coefficients,
    validate,
)
from .montecarlo import McConfig, PathBatchStats, simulate_grid, simulate_price, simulate_radon_nikodym_check
from .pricing import merton_reference, price_call, price_forward, price_moving_hwm_call, price_put
from .transforms import (
    DomainError,
    TransformHandle,
    c2_transform,
    excursion_kernel,
    forward_transform,
    inception_call_transform,
)

__all__ = [
    "Coefficients",
    "DomainError",
    "FundParameters",
    "HwmMode",
    "InversionConfig",
    "McConfig",
    "Method",
    "ParameterError",
    "PathBatchStats",
    "PriceQuote",
    "TransformHandle",
    "c1_price",
    "c2_transform",
    "derive_coefficients",
    "excursion_kernel",
    "first_passage_cdf",
    "forward_transform",
    "inception_call_transform",
    "invert",
    "lifetime_call_price",
    "merton_reference",
    "price_call",
    "price_forward",
    "price_moving_hwm_call",
    "price_put",
    "restricted_expectation",
    "self_test",
    "simulate_grid",
    "simulate_price",
    "simulate_radon_nikodym_check",
    "validate",
]
