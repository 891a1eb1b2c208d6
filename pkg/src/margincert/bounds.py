"""Closed-form fluctuation bounds and usefulness thresholds.

For a bounded function of n independent bounded inputs with per-input
diameters D_i, the bounded-differences (McDiarmid) inequality gives

    P(F > E F + delta) <= exp(-2 delta^2 / D_F^2),   D_F^2 = sum_i D_i^2,

and the same bound holds for deviations below the mean.  Inverting the
tail at a target exceedance probability ``epsilon`` yields the deviation
bound

    B(epsilon) = D_F * sqrt(log(1/epsilon) / 2).

The competing absolute bound uses only the output range: deviations above
the mean can never exceed F_max - mean and deviations below it can never
exceed mean - F_min, each with exceedance probability zero.  Writing
n_eff = (sum D_i)^2 / sum D_i^2 and delta_F = F_max - F_min, the identity
sum D_i >= delta_F forces

    B(epsilon) >= delta_F * sqrt(log(1/epsilon) / (2 n_eff)),

so the concentration bound can only beat the symmetric absolute bound
(half the range) when n_eff > 2 log(1/epsilon), and can only beat a
margin equal to the fraction r of the range when
n_eff > log(1/epsilon) / (2 r^2).

All logarithms are natural, so the bound inverts the tail exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import ZeroDiameterError

__all__ = [
    "system_diameter", "effective_n", "mcdiarmid_tail", "mcdiarmid_bound",
    "theorem_lower_bound", "required_neff", "required_neff_fraction",
    "absolute_bounds", "BoundsSummary", "build_summary", "compare",
]


def _check_epsilon(epsilon: float) -> float:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon!r}")
    return epsilon


def _check_nonneg(D: Sequence[float]) -> None:
    for i, d in enumerate(D):
        if d < 0 or not math.isfinite(d):
            raise ValueError(f"diameter {i} is {d!r}; must be finite and >= 0")


def system_diameter(D: Sequence[float]) -> float:
    """Euclidean norm of the diameter vector: sqrt(sum D_i^2)."""
    _check_nonneg(D)
    return math.sqrt(math.fsum(d * d for d in D))


def effective_n(D: Sequence[float]) -> float:
    """Effective number of independent inputs: (sum D_i)^2 / sum D_i^2.

    Equals n when all diameters are equal and m when m of them are equal
    and the rest zero.  Undefined for the all-zero vector.
    """
    _check_nonneg(D)
    total = math.fsum(D)
    squares = math.fsum(d * d for d in D)
    if squares == 0.0:
        raise ZeroDiameterError(
            "effective_n is undefined when every diameter is zero"
        )
    return total * total / squares


def mcdiarmid_tail(delta: float, D_F: float) -> float:
    """One-sided exceedance probability bound exp(-2 delta^2 / D_F^2).

    The same bound applies to deviations below the mean.  At D_F = 0 the
    only admissible deviation is 0, which gives 1 by convention.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta!r}")
    if D_F < 0:
        raise ValueError(f"D_F must be >= 0, got {D_F!r}")
    if D_F == 0.0:
        if delta == 0.0:
            return 1.0
        raise ValueError("tail undefined for delta > 0 when D_F = 0")
    return math.exp(-2.0 * delta * delta / (D_F * D_F))


def mcdiarmid_bound(epsilon: float, D_F: float) -> float:
    """Deviation bound D_F * sqrt(log(1/epsilon) / 2) inverting the tail."""
    _check_epsilon(epsilon)
    if D_F < 0:
        raise ValueError(f"D_F must be >= 0, got {D_F!r}")
    if D_F == 0.0:
        return 0.0
    return D_F * math.sqrt(0.5 * -math.log(epsilon))


def theorem_lower_bound(epsilon: float, delta_F: float, n_eff: float) -> float:
    """Smallest value the deviation bound can take given the output range:
    delta_F * sqrt(log(1/epsilon) / (2 n_eff))."""
    _check_epsilon(epsilon)
    if delta_F < 0:
        raise ValueError(f"delta_F must be >= 0, got {delta_F!r}")
    if delta_F == 0.0:
        return 0.0
    if n_eff < 1:
        raise ValueError(f"n_eff must be >= 1, got {n_eff!r}")
    return delta_F * math.sqrt(-math.log(epsilon) / (2.0 * n_eff))


def required_neff(epsilon: float) -> float:
    """Threshold 2 log(1/epsilon) that n_eff must exceed for the
    concentration bound to possibly beat half the range."""
    _check_epsilon(epsilon)
    return 2.0 * -math.log(epsilon)


def required_neff_fraction(epsilon: float, r: float) -> float:
    """Threshold log(1/epsilon) / (2 r^2) that n_eff must exceed for the
    concentration bound to fit under a margin of r times the range."""
    _check_epsilon(epsilon)
    if not 0.0 < r <= 1.0:
        raise ValueError(f"r must be in (0, 1], got {r!r}")
    return -math.log(epsilon) / (2.0 * r * r)


def absolute_bounds(F_min: float, F_max: float,
                    mean: float) -> tuple[float, float, float, float]:
    """Largest possible deviations below/above the mean and their range
    fractions: (abs_minus, abs_plus, r_minus, r_plus).

    abs_plus = F_max - mean = r_plus * delta_F and symmetrically for the
    minus side; r_plus + r_minus = 1 exactly.  A zero range returns all
    zeros with r = 1/2 on both sides by convention.
    """
    if F_max < F_min:
        raise ValueError(f"F_max {F_max!r} < F_min {F_min!r}")
    if not F_min <= mean <= F_max:
        raise ValueError(
            f"mean {mean!r} outside the range [{F_min!r}, {F_max!r}]"
        )
    delta = F_max - F_min
    if delta == 0.0:
        return 0.0, 0.0, 0.5, 0.5
    r_plus = (F_max - mean) / delta
    r_minus = 1.0 - r_plus
    return mean - F_min, F_max - mean, r_minus, r_plus


@dataclass(frozen=True)
class BoundsSummary:
    """All closed-form quantities for one problem at one target epsilon.

    ``n_eff`` and ``theorem_lb`` are None when every diameter is zero
    (constant response); everything else degrades to zero there.
    """

    D: tuple[float, ...]
    D_F: float
    f: tuple[float, ...]
    f_max: float
    n_eff: float | None
    F_min: float
    F_max: float
    delta_F: float
    mean: float
    mean_source: str
    r_plus: float
    r_minus: float
    epsilon: float
    mcd_bound: float
    theorem_lb: float | None
    neff_required: float
    abs_plus: float
    abs_minus: float


def build_summary(D: Sequence[float], F_min: float, F_max: float, mean: float,
                  epsilon: float, mean_source: str = "given") -> BoundsSummary:
    """Assemble a BoundsSummary from a diameter vector, range and mean."""
    _check_epsilon(epsilon)
    _check_nonneg(D)
    D = tuple(float(d) for d in D)
    d_f = system_diameter(D)
    total = math.fsum(D)
    if total > 0.0:
        f = tuple(d / total for d in D)
        f_max = max(f)
        n_eff = effective_n(D)
    else:
        f = (0.0,) * len(D)
        f_max = 0.0
        n_eff = None
    abs_minus, abs_plus, r_minus, r_plus = absolute_bounds(F_min, F_max, mean)
    delta = F_max - F_min
    if delta == 0.0:
        theorem_lb = 0.0
    elif n_eff is None:
        theorem_lb = None
    else:
        theorem_lb = theorem_lower_bound(epsilon, delta, n_eff)
    return BoundsSummary(
        D=D, D_F=d_f, f=f, f_max=f_max, n_eff=n_eff,
        F_min=F_min, F_max=F_max, delta_F=delta,
        mean=mean, mean_source=mean_source,
        r_plus=r_plus, r_minus=r_minus,
        epsilon=epsilon,
        mcd_bound=mcdiarmid_bound(epsilon, d_f),
        theorem_lb=theorem_lb,
        neff_required=required_neff(epsilon),
        abs_plus=abs_plus, abs_minus=abs_minus,
    )


def compare(epsilon: float, summary: BoundsSummary, direction: str) -> str:
    """Which bound is smaller for the given direction: "ABSOLUTE" when the
    absolute bound is at most the concentration bound (ties prefer
    ABSOLUTE, whose exceedance probability is zero), else "MCDIARMID".

    Two-sided comparisons use the smaller of the two absolute bounds.
    """
    _check_epsilon(epsilon)
    if direction == "plus":
        abs_bound = summary.abs_plus
    elif direction == "minus":
        abs_bound = summary.abs_minus
    elif direction == "two-sided":
        abs_bound = min(summary.abs_plus, summary.abs_minus)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return "ABSOLUTE" if abs_bound <= summary.mcd_bound else "MCDIARMID"
