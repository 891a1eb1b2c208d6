"""Margin certification toolkit for bounded black-box response functions.

Estimates the per-input diameters and output range of a bounded function
of independent bounded inputs, computes concentration-of-measure
(McDiarmid) and absolute fluctuation bounds, and decides which bound, if
either, certifies a given margin at a target probability of failure.
"""

from .blackbox import (
    BUILTIN_NAMES, BoxDomain, InputSpec, PointMass, ResponseFunction,
    Triangular, Uniform, builtin_function, command_function, corners,
    expression_function, sample,
)
from .bounds import (
    BoundsSummary, absolute_bounds, build_summary, compare, effective_n,
    mcdiarmid_bound, mcdiarmid_tail, required_neff, required_neff_fraction,
    system_diameter, theorem_lower_bound,
)
from .certify import (
    CertificationReport, UsefulnessAdvisory, certify, usefulness_check,
)
from .diameter import (
    DiameterEstimate, WitnessPair, estimate_auto, estimate_grid,
    estimate_multistart, estimate_vertex, merge,
)
from .errors import (
    BudgetExceededError, ConfigError, DomainMismatchError, EvaluationError,
    InconsistentEstimateError, MargincertError, ParseError, ZeroDiameterError,
)
from .expr import evaluate, parse, unparse, variables
from .montecarlo import MeanEstimate, ValidationResult, estimate_mean, validate_bound

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES", "BoxDomain", "InputSpec", "PointMass", "ResponseFunction",
    "Triangular", "Uniform", "builtin_function", "command_function", "corners",
    "expression_function", "sample",
    "BoundsSummary", "absolute_bounds", "build_summary", "compare",
    "effective_n", "mcdiarmid_bound", "mcdiarmid_tail", "required_neff",
    "required_neff_fraction", "system_diameter", "theorem_lower_bound",
    "CertificationReport", "UsefulnessAdvisory", "certify", "usefulness_check",
    "DiameterEstimate", "WitnessPair", "estimate_auto", "estimate_grid",
    "estimate_multistart", "estimate_vertex", "merge",
    "BudgetExceededError", "ConfigError", "DomainMismatchError",
    "EvaluationError", "InconsistentEstimateError", "MargincertError",
    "ParseError", "ZeroDiameterError",
    "evaluate", "parse", "unparse", "variables",
    "MeanEstimate", "ValidationResult", "estimate_mean", "validate_bound",
    "__version__",
]
