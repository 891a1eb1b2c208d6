"""Derivative-free estimation of per-input diameters and output range.

The per-input diameter D_i is the largest change in the response that
varying only input i over its interval can produce; the range is
F_max - F_min over the box.  Three methods are provided:

* ``estimate_vertex``: evaluates all 2^n box corners.  Exact when the
  response is declared coordinate-wise monotone, otherwise a lower
  estimate.
* ``estimate_grid``: exhaustive maxima over a uniform product grid.
  Exact on the grid itself; the brute-force oracle used by the tests.
* ``estimate_multistart``: seeded multistart cyclic coordinate search
  over the joint vector (x, x'_i).  Deterministic given the seed.

All estimated suprema are lower bounds on the true suprema, so bounds
computed from them may be optimistic; estimates carry an exactness flag
and witness point pairs that reproduce every reported value.  Searches
skip failed evaluations; an estimate whose search saw more than 10%
failed probes is marked unreliable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .blackbox import BoxDomain, ResponseFunction, corners, DEFAULT_VERTEX_LIMIT
from .errors import BudgetExceededError, DomainMismatchError, EvaluationError

__all__ = [
    "WitnessPair", "DiameterEstimate",
    "estimate_vertex", "estimate_grid", "estimate_multistart",
    "estimate_auto", "merge",
    "DEFAULT_GRID_BUDGET",
]

#: Largest number of grid points estimate_grid will evaluate by default.
DEFAULT_GRID_BUDGET = 1_000_000

# Multistart coordinate-search schedule: initial step is a quarter of each
# axis width, halved after any full sweep without improvement, floored at
# 1e-9 of the axis width.
_STEP_FRACTION = 0.25
_STEP_FLOOR = 1e-9

#: Failed-probe fraction above which a search result is marked unreliable.
UNRELIABLE_FAILURE_FRAC = 0.10


@dataclass(frozen=True)
class WitnessPair:
    """Two points differing in one coordinate that achieve a diameter value."""

    a: tuple[float, ...]
    b: tuple[float, ...]
    value: float


@dataclass(frozen=True)
class DiameterEstimate:
    """Per-input diameters and range estimates with method metadata.

    ``exact`` is True only when the method guarantees the true suprema
    (vertex enumeration of a coordinate-wise monotone response);
    otherwise every value is a lower estimate.
    """

    domain: BoxDomain
    D: tuple[float, ...]
    F_min: float
    F_max: float
    method: str
    budget_used: int
    witnesses: tuple[WitnessPair, ...]
    min_witness: tuple[float, ...]
    max_witness: tuple[float, ...]
    exact: bool
    failed_evals: int = 0
    unreliable: bool = False

    def __post_init__(self):
        if any(d < 0 for d in self.D):
            raise ValueError("diameters must be nonnegative")
        if self.F_max < self.F_min:
            raise ValueError("F_max must be >= F_min")

    @property
    def delta_F(self) -> float:
        return self.F_max - self.F_min

    @property
    def exactness(self) -> str:
        return "exact" if self.exact else "lower-estimate"


def estimate_vertex(f: ResponseFunction, monotone: bool = False,
                    vertex_limit: int = DEFAULT_VERTEX_LIMIT) -> DiameterEstimate:
    """Diameters and range over the 2^n box vertices.

    Exact for coordinate-wise monotone responses (set ``monotone`` when
    the problem asserts that); a lower estimate otherwise.
    """
    domain = f.domain
    n = domain.n
    start = f.eval_count
    verts = list(corners(domain, limit=vertex_limit))
    vals = f.eval_many(verts)

    D = []
    witnesses = []
    for i in range(n):
        bit = 1 << (n - 1 - i)
        best = -1.0
        pair = (verts[0], verts[0])
        for m in range(len(verts)):
            if m & bit:
                continue
            d = abs(vals[m] - vals[m | bit])
            if d > best:
                best = d
                pair = (verts[m], verts[m | bit])
        D.append(max(best, 0.0))
        witnesses.append(WitnessPair(pair[0], pair[1], D[-1]))

    imin = min(range(len(vals)), key=vals.__getitem__)
    imax = max(range(len(vals)), key=vals.__getitem__)
    return DiameterEstimate(
        domain=domain, D=tuple(D),
        F_min=vals[imin], F_max=vals[imax],
        method="vertex", budget_used=f.eval_count - start,
        witnesses=tuple(witnesses),
        min_witness=verts[imin], max_witness=verts[imax],
        exact=bool(monotone),
    )


def estimate_grid(f: ResponseFunction, resolution: int,
                  max_points: int = DEFAULT_GRID_BUDGET) -> DiameterEstimate:
    """Exhaustive diameters and range over a uniform product grid.

    ``resolution`` equally spaced levels per axis, endpoints included.
    Exact on the grid itself, hence a lower estimate of the true values;
    at resolution 2 the grid is the vertex set.
    """
    domain = f.domain
    n = domain.n
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    total = resolution ** n
    if total > max_points:
        raise BudgetExceededError(
            f"grid of {total} points exceeds the budget of {max_points}; "
            f"use a coarser resolution or multistart estimation"
        )
    axes = [np.linspace(s.lo, s.hi, resolution) for s in domain.inputs]
    points = [tuple(map(float, p)) for p in itertools.product(*axes)]
    start = f.eval_count
    vals = np.asarray(f.eval_many(points), dtype=float).reshape((resolution,) * n)

    D = []
    witnesses = []
    for i in range(n):
        fibers = np.moveaxis(vals, i, -1).reshape(-1, resolution)
        spans = fibers.max(axis=1) - fibers.min(axis=1)
        row = int(np.argmax(spans))
        fiber = fibers[row]
        jmax = int(np.argmax(fiber))
        jmin = int(np.argmin(fiber))
        rest_shape = vals.shape[:i] + vals.shape[i + 1:]
        rest = tuple(int(k) for k in np.unravel_index(row, rest_shape)) if rest_shape else ()
        idx_a = rest[:i] + (jmax,) + rest[i:]
        idx_b = rest[:i] + (jmin,) + rest[i:]
        a = tuple(float(axes[k][idx_a[k]]) for k in range(n))
        b = tuple(float(axes[k][idx_b[k]]) for k in range(n))
        d = float(spans[row])
        D.append(d)
        witnesses.append(WitnessPair(a, b, d))

    flat = vals.reshape(-1)
    imin = int(np.argmin(flat))
    imax = int(np.argmax(flat))
    return DiameterEstimate(
        domain=domain, D=tuple(D),
        F_min=float(flat[imin]), F_max=float(flat[imax]),
        method=f"grid:{resolution}", budget_used=f.eval_count - start,
        witnesses=tuple(witnesses),
        min_witness=points[imin], max_witness=points[imax],
        exact=False,
    )


class _Probes:
    """Counts search probes and failures; tracks the best range seen."""

    def __init__(self, f: ResponseFunction):
        self._f = f
        self.total = 0
        self.failed = 0
        self.min_val = math.inf
        self.min_point: tuple[float, ...] | None = None
        self.max_val = -math.inf
        self.max_point: tuple[float, ...] | None = None

    def eval(self, point: tuple[float, ...]) -> float:
        """Evaluate and track extremes; raises on failure."""
        v = self._f.eval_at(point)
        if v < self.min_val:
            self.min_val, self.min_point = v, point
        if v > self.max_val:
            self.max_val, self.max_point = v, point
        return v


def _coordinate_ascent(fun: Callable[[np.ndarray], float], y0: np.ndarray,
                       lo: np.ndarray, hi: np.ndarray, iters: int) -> tuple[np.ndarray, float]:
    """Maximize ``fun`` over the box by cyclic +-step probing.

    Steps start at a quarter of each axis width and halve after any full
    sweep without improvement; the search stops when all steps fall below
    1e-9 of the axis width or after ``iters`` sweeps.  Failed probes
    return -inf from ``fun`` and are simply never accepted.
    """
    steps = (hi - lo) * _STEP_FRACTION
    floor = (hi - lo) * _STEP_FLOOR
    y = np.array(y0, dtype=float)
    best = fun(y)
    for _ in range(iters):
        improved = False
        for j in range(len(y)):
            if steps[j] <= 0.0:
                continue
            for cand in (y[j] + steps[j], y[j] - steps[j]):
                c = min(max(cand, lo[j]), hi[j])
                if c == y[j]:
                    continue
                trial = y.copy()
                trial[j] = c
                v = fun(trial)
                if v > best:
                    best = v
                    y = trial
                    improved = True
                    break
        if not improved:
            steps *= 0.5
            if np.all(steps < floor):
                break
    return y, best


def estimate_multistart(f: ResponseFunction, starts: int, iters: int,
                        seed: int = 0) -> DiameterEstimate:
    """Stochastic lower estimates by multistart cyclic coordinate search.

    For each input i, ``starts`` independent searches maximize
    |F(..., x_i, ...) - F(..., x'_i, ...)| over the joint vector
    (x, x'_i); the range is searched the same way on F and -F, and every
    probe made anywhere also feeds the range tracking.  Deterministic
    given ``seed``: per-(coordinate, start) streams are derived from it,
    and the reduction keeps the earliest start on ties, so results do not
    depend on execution order.
    """
    if starts < 1:
        raise ValueError(f"starts must be >= 1, got {starts}")
    if iters < 1:
        raise ValueError(f"iters must be >= 1, got {iters}")
    domain = f.domain
    n = domain.n
    lows = np.array(domain.lows)
    highs = np.array(domain.highs)
    start_count = f.eval_count
    probes = _Probes(f)

    def pair_objective(i: int) -> Callable[[np.ndarray], float]:
        def fun(y: np.ndarray) -> float:
            probes.total += 1
            p1 = tuple(y[:n])
            p2 = list(p1)
            p2[i] = y[n]
            try:
                return abs(probes.eval(p1) - probes.eval(tuple(p2)))
            except EvaluationError:
                probes.failed += 1
                return -math.inf
        return fun

    def signed_objective(sign: float) -> Callable[[np.ndarray], float]:
        def fun(y: np.ndarray) -> float:
            probes.total += 1
            try:
                return sign * probes.eval(tuple(y))
            except EvaluationError:
                probes.failed += 1
                return -math.inf
        return fun

    D = []
    witnesses = []
    for i in range(n):
        jlo = np.append(lows, lows[i])
        jhi = np.append(highs, highs[i])
        fun = pair_objective(i)
        best_val = -math.inf
        best_y: np.ndarray | None = None
        for s in range(starts):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, s)))
            y0 = jlo + rng.random(n + 1) * (jhi - jlo)
            y, val = _coordinate_ascent(fun, y0, jlo, jhi, iters)
            if val > best_val:
                best_val, best_y = val, y
        if best_y is None or not math.isfinite(best_val):
            raise EvaluationError(
                f"all probes failed while searching the diameter of input "
                f"{domain.names[i]!r}"
            )
        a = tuple(best_y[:n])
        b = list(a)
        b[i] = best_y[n]
        D.append(max(best_val, 0.0))
        witnesses.append(WitnessPair(a, tuple(b), D[-1]))

    # Dedicated range searches; spawn keys (n, s) and (n+1, s) keep their
    # streams disjoint from the per-coordinate ones.
    for key, sign in ((n, 1.0), (n + 1, -1.0)):
        fun = signed_objective(sign)
        for s in range(starts):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key, s)))
            y0 = lows + rng.random(n) * (highs - lows)
            _coordinate_ascent(fun, y0, lows, highs, iters)

    if probes.min_point is None or probes.max_point is None:
        raise EvaluationError("all probes failed while searching the range")
    return DiameterEstimate(
        domain=domain, D=tuple(D),
        F_min=probes.min_val, F_max=probes.max_val,
        method=f"multistart:{starts},{iters}",
        budget_used=f.eval_count - start_count,
        witnesses=tuple(witnesses),
        min_witness=probes.min_point, max_witness=probes.max_point,
        exact=False,
        failed_evals=probes.failed,
        unreliable=probes.failed > UNRELIABLE_FAILURE_FRAC * probes.total,
    )


def estimate_auto(f: ResponseFunction, seed: int = 0,
                  monotone: bool = False) -> DiameterEstimate:
    """Default method: vertex for n <= 12, multistart(16, 30) otherwise."""
    if f.domain.n <= 12:
        return estimate_vertex(f, monotone=monotone)
    return estimate_multistart(f, 16, 30, seed)


def merge(a: DiameterEstimate, b: DiameterEstimate) -> DiameterEstimate:
    """Combine two estimates of the same function: coordinatewise max of
    the diameters, min of F_min, max of F_max, witnesses from the winning
    side.  Idempotent: merge(x, x) is x."""
    if a.domain != b.domain:
        raise DomainMismatchError("cannot merge estimates over different domains")
    if a == b:
        return a
    D = []
    witnesses = []
    for i in range(len(a.D)):
        if b.D[i] > a.D[i]:
            D.append(b.D[i])
            witnesses.append(b.witnesses[i])
        else:
            D.append(a.D[i])
            witnesses.append(a.witnesses[i])
    if b.F_min < a.F_min:
        f_min, min_w = b.F_min, b.min_witness
    else:
        f_min, min_w = a.F_min, a.min_witness
    if b.F_max > a.F_max:
        f_max, max_w = b.F_max, b.max_witness
    else:
        f_max, max_w = a.F_max, a.max_witness
    return DiameterEstimate(
        domain=a.domain, D=tuple(D), F_min=f_min, F_max=f_max,
        method=f"merge({a.method},{b.method})",
        budget_used=a.budget_used + b.budget_used,
        witnesses=tuple(witnesses), min_witness=min_w, max_witness=max_w,
        exact=a.exact or b.exact,
        failed_evals=a.failed_evals + b.failed_evals,
        unreliable=a.unreliable or b.unreliable,
    )
