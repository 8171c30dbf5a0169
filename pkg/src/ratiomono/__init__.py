"""Monotonicity of ratios of power-type series and integral transforms."""

from .classifier import (
    CoefficientShape,
    RegionLabel,
    classify_region,
    coefficient_ratio_shape,
    find_turning_point,
    gamma_ratio_pattern,
    gamma_sequence_pattern,
    predict_de_ratio,
    predict_series_ratio,
    predict_transform_ratio,
)
from .errors import (
    BracketNotFoundError,
    DerivativeDegeneracyError,
    DivisionDomainError,
    DomainError,
    NonConvergenceError,
    OracleEvaluationError,
)
from .kernels import get_kernel, verify_class_conditions
from .oracle import crosscheck, detect_pattern
from .patterns import MonotonicityVerdict, Pattern
from .ratio_engine import (
    SeriesRatioProblem,
    TransformRatioProblem,
    endpoint_limit_H,
    eval_H,
    eval_ratio,
    ratio_derivative_via_H,
)
from .specfun import digamma, ln_gamma, mittag_leffler, reciprocal_gamma
from .stochastic import laplace_transform, lt_ratio_order

__version__ = "0.1.0"

__all__ = [
    "BracketNotFoundError",
    "CoefficientShape",
    "DerivativeDegeneracyError",
    "DivisionDomainError",
    "DomainError",
    "MonotonicityVerdict",
    "NonConvergenceError",
    "OracleEvaluationError",
    "Pattern",
    "RegionLabel",
    "SeriesRatioProblem",
    "TransformRatioProblem",
    "classify_region",
    "coefficient_ratio_shape",
    "crosscheck",
    "detect_pattern",
    "digamma",
    "endpoint_limit_H",
    "eval_H",
    "eval_ratio",
    "find_turning_point",
    "gamma_ratio_pattern",
    "gamma_sequence_pattern",
    "get_kernel",
    "laplace_transform",
    "ln_gamma",
    "lt_ratio_order",
    "mittag_leffler",
    "predict_de_ratio",
    "predict_series_ratio",
    "predict_transform_ratio",
    "ratio_derivative_via_H",
    "reciprocal_gamma",
    "verify_class_conditions",
]
