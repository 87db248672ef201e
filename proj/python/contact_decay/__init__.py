"""Decay-rate bounds and estimators for threshold-one contact processes."""

from ._core import (
    NumericalError,
    PropertyViolation,
    __version__,
    eigencheck,
    fixed_point,
    heat_kernel,
    hitting_probability,
    hitting_probability_mc,
    limit_scan,
    rate_bounds,
    survival_curve,
)

__all__ = [
    "NumericalError",
    "PropertyViolation",
    "__version__",
    "eigencheck",
    "fixed_point",
    "heat_kernel",
    "hitting_probability",
    "hitting_probability_mc",
    "limit_scan",
    "rate_bounds",
    "survival_curve",
]
