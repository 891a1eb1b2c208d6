"""Monte Carlo mean estimation and empirical tail-bound validation.

``estimate_mean`` draws inputs under the declared sampling distributions
and returns the sample mean with its standard error.  ``validate_bound``
counts how often sampled deviations from a given mean exceed a candidate
bound and compares the exceedance fraction against the target probability
plus three binomial standard deviations of slack, so a correct bound is
declared violated with probability well under 1%.  The mean is an
explicit input so the exact-mean case is testable; its uncertainty is
surfaced but never folded into the verdict.

All sampling is deterministic given the seed: points come from a single
seeded stream and are evaluated in order, so any parallel evaluation
scheme that preserves order reproduces these results exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .blackbox import ResponseFunction, sample
from .errors import EvaluationError

__all__ = ["MeanEstimate", "ValidationResult", "estimate_mean", "validate_bound"]

#: Evaluation failures beyond this fraction of the sample abort the run.
MAX_FAILURE_FRAC = 0.01


class MeanEstimate(NamedTuple):
    mean_hat: float
    se_mean: float


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of one empirical check of a deviation bound."""

    samples: int
    mean_hat: float
    se_mean: float
    bound_tested: float
    exceed_count: int
    exceed_frac: float
    epsilon: float
    verdict: str  # consistent | violated
    binomial_slack: float
    direction: str
    failures: int = 0


def _run_samples(f: ResponseFunction, count: int, seed) -> tuple[list[float], int]:
    points = sample(f.domain, count, seed).tolist()
    values: list[float] = []
    failures = 0
    for point in points:
        try:
            values.append(f.eval_at(point))
        except EvaluationError:
            failures += 1
    if failures > MAX_FAILURE_FRAC * count:
        raise EvaluationError(
            f"{failures} of {count} sample evaluations failed "
            f"(more than {MAX_FAILURE_FRAC:.0%})"
        )
    return values, failures


def estimate_mean(f: ResponseFunction, samples: int, seed=0) -> MeanEstimate:
    """Sample mean and standard error under the declared input dists.

    Deterministic given ``seed``.  Raises EvaluationError when more than
    1% of the evaluations fail; fewer failures are simply skipped.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    values, _ = _run_samples(f, samples, seed)
    arr = np.asarray(values)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return MeanEstimate(float(arr.mean()), se)


def validate_bound(f: ResponseFunction, mean: float, bound: float,
                   epsilon: float, samples: int, seed=0,
                   direction: str = "plus") -> ValidationResult:
    """Count sampled deviations beyond ``bound`` and judge consistency.

    Plus direction counts F(x) - mean > bound; minus counts
    mean - F(x) > bound.  The verdict is "violated" only when the
    exceedance fraction is above epsilon + 3 sqrt(eps (1-eps) / N).
    """
    if samples < 100:
        raise ValueError(f"samples must be >= 100, got {samples}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon!r}")
    if bound < 0:
        raise ValueError(f"bound must be >= 0, got {bound!r}")
    if direction not in ("plus", "minus"):
        raise ValueError(f"direction must be 'plus' or 'minus', got {direction!r}")

    values, failures = _run_samples(f, samples, seed)
    arr = np.asarray(values)
    deviations = arr - mean if direction == "plus" else mean - arr
    exceed = int(np.count_nonzero(deviations > bound))
    frac = exceed / samples
    slack = 3.0 * math.sqrt(epsilon * (1.0 - epsilon) / samples)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return ValidationResult(
        samples=samples,
        mean_hat=float(arr.mean()),
        se_mean=se,
        bound_tested=float(bound),
        exceed_count=exceed,
        exceed_frac=frac,
        epsilon=epsilon,
        verdict="violated" if frac > epsilon + slack else "consistent",
        binomial_slack=slack,
        direction=direction,
        failures=failures,
    )
