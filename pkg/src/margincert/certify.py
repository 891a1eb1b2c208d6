"""Margin certification: verdicts, recommendation and usefulness advice.

A margin M is certified by the absolute bound when M is at least the
largest deviation that is possible at all (claimed probability of
failure: zero), and by the concentration bound when M is at least
B(epsilon) (claimed probability of failure: epsilon per side).
Two-sided certification requires the margin to hold on both sides and
claims the sum of the per-side probabilities.

The report also carries the classical reliability view of the absolute
bound: deviations measured from the design point (F_max + F_min) / 2,
uncertainty U = (F_max - F_min) / 2, and the confidence ratio M / U,
which exceeds one exactly when a symmetric-mean two-sided margin clears
the absolute bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bounds import (
    BoundsSummary, build_summary, required_neff, required_neff_fraction,
)
from .diameter import DiameterEstimate
from .errors import InconsistentEstimateError

__all__ = [
    "CertificationReport", "UsefulnessAdvisory", "certify", "usefulness_check",
    "DIRECTIONS",
]

DIRECTIONS = ("plus", "minus", "two-sided")


@dataclass(frozen=True)
class CertificationReport:
    problem: str
    direction: str
    margin: float
    epsilon: float
    summary: BoundsSummary
    design_point: float
    uncertainty: float  # half the range
    confidence_ratio: float  # margin / uncertainty; inf for a constant response
    required_margin_absolute: float
    required_margin_mcdiarmid: float
    verdict_absolute: str  # pass | fail
    verdict_mcdiarmid: str  # pass | fail
    recommendation: str  # ABSOLUTE | MCDIARMID | NEITHER
    claimed_pof: float | None  # None when not certified
    caveats: tuple[str, ...]


@dataclass(frozen=True)
class UsefulnessAdvisory:
    n_eff: float | None
    epsilon: float
    neff_required: float
    useful: bool
    r: float | None
    neff_required_at_r: float | None
    useful_at_r: bool | None
    text: str


def certify(estimate: DiameterEstimate, mean: float, margin: float,
            epsilon: float, direction: str = "two-sided",
            problem: str = "", mean_source: str = "given") -> CertificationReport:
    """Decide whether ``margin`` is certified at target ``epsilon``.

    Margin comparisons pass on equality.  The recommendation is the
    passing bound with the smaller required margin; ties prefer ABSOLUTE
    because its claimed probability of failure is zero.
    """
    if margin < 0:
        raise ValueError(f"margin must be >= 0, got {margin!r}")
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    if not estimate.F_min <= mean <= estimate.F_max:
        raise InconsistentEstimateError(
            f"mean {mean!r} lies outside the estimated range "
            f"[{estimate.F_min!r}, {estimate.F_max!r}]"
        )
    summary = build_summary(
        estimate.D, estimate.F_min, estimate.F_max, mean, epsilon,
        mean_source=mean_source,
    )
    if direction == "plus":
        need_abs = summary.abs_plus
    elif direction == "minus":
        need_abs = summary.abs_minus
    else:
        need_abs = max(summary.abs_plus, summary.abs_minus)
    need_mcd = summary.mcd_bound

    pass_abs = margin >= need_abs
    pass_mcd = margin >= need_mcd
    per_side = epsilon
    claimed: float | None
    if pass_abs:
        claimed = 0.0
    elif pass_mcd:
        claimed = 2.0 * per_side if direction == "two-sided" else per_side
    else:
        claimed = None
    if pass_abs and pass_mcd:
        recommendation = "ABSOLUTE" if need_abs <= need_mcd else "MCDIARMID"
    elif pass_abs:
        recommendation = "ABSOLUTE"
    elif pass_mcd:
        recommendation = "MCDIARMID"
    else:
        recommendation = "NEITHER"

    caveats = ["margin comparisons pass on equality"]
    if not estimate.exact:
        caveats.append(
            "diameters and range are lower estimates; both bounds may be optimistic"
        )
    if estimate.unreliable:
        caveats.append(
            "estimate marked unreliable: more than 10% of search probes failed"
        )
    if mean_source == "assumed-midpoint":
        caveats.append(
            "mean assumed midway between the extremes (r = 1/2 on both sides)"
        )
    if direction == "two-sided" and pass_mcd and not pass_abs:
        caveats.append(
            f"two-sided probability of failure adds the per-side targets: "
            f"{2.0 * per_side:g}"
        )

    half_range = 0.5 * summary.delta_F
    return CertificationReport(
        problem=problem,
        direction=direction,
        margin=margin,
        epsilon=epsilon,
        summary=summary,
        design_point=0.5 * (summary.F_max + summary.F_min),
        uncertainty=half_range,
        confidence_ratio=margin / half_range if half_range > 0 else math.inf,
        required_margin_absolute=need_abs,
        required_margin_mcdiarmid=need_mcd,
        verdict_absolute="pass" if pass_abs else "fail",
        verdict_mcdiarmid="pass" if pass_mcd else "fail",
        recommendation=recommendation,
        claimed_pof=claimed,
        caveats=tuple(caveats),
    )


def usefulness_check(n_eff: float | None, epsilon: float,
                     r: float | None = None) -> UsefulnessAdvisory:
    """Can the concentration bound possibly beat the absolute bound?

    Requires n_eff > 2 log(1/epsilon); with a margin that is the fraction
    ``r`` of the range, requires n_eff > log(1/epsilon) / (2 r^2).
    """
    threshold = required_neff(epsilon)
    if n_eff is None:
        text = (
            "every diameter is zero: the response is constant and the "
            "absolute bound certifies trivially"
        )
        return UsefulnessAdvisory(
            n_eff=None, epsilon=epsilon, neff_required=threshold,
            useful=False, r=r,
            neff_required_at_r=None if r is None else required_neff_fraction(epsilon, r),
            useful_at_r=None if r is None else False,
            text=text,
        )
    useful = n_eff > threshold
    parts = [
        f"n_eff = {n_eff:.4g} {'exceeds' if useful else 'does not exceed'} "
        f"the threshold {threshold:.4f} for epsilon = {epsilon:g}: "
        f"the concentration bound {'can' if useful else 'cannot'} beat "
        f"half the range"
    ]
    if not useful:
        parts.append("use the absolute bound")
    threshold_r = None
    useful_r = None
    if r is not None:
        threshold_r = required_neff_fraction(epsilon, r)
        useful_r = n_eff > threshold_r
        parts.append(
            f"for a margin of {r:g} times the range the threshold is "
            f"{threshold_r:.4g}: {'attainable' if useful_r else 'not attainable'}"
        )
    return UsefulnessAdvisory(
        n_eff=n_eff, epsilon=epsilon, neff_required=threshold, useful=useful,
        r=r, neff_required_at_r=threshold_r, useful_at_r=useful_r,
        text="; ".join(parts),
    )
