"""Shared test utilities: independent oracles and random problem generators."""

from __future__ import annotations

import itertools

import numpy as np

from margincert import BoxDomain, expression_function


def pairwise_diameters(fn, lows, highs, levels):
    """Brute-force oracle: literal pair scan over a uniform grid.

    For each input i, scans every pair of grid points that differ only in
    coordinate i and takes the largest |F(a) - F(b)|.  Deliberately does
    not use the fiber max-min shortcut the production code uses.
    Returns (D, F_min, F_max).
    """
    axes = [np.linspace(lo, hi, levels) for lo, hi in zip(lows, highs)]
    points = list(itertools.product(*axes))
    values = {p: fn(p) for p in points}
    n = len(lows)
    D = []
    for i in range(n):
        best = 0.0
        others = [axes[k] for k in range(n) if k != i]
        for rest in itertools.product(*others):
            for a_i, b_i in itertools.combinations(axes[i], 2):
                pa = rest[:i] + (a_i,) + rest[i:]
                pb = rest[:i] + (b_i,) + rest[i:]
                best = max(best, abs(values[pa] - values[pb]))
        D.append(best)
    vals = list(values.values())
    return D, min(vals), max(vals)


def random_affine(rng, max_n=6):
    """Random affine function: text, weights, intercept and box bounds.

    Guarantees at least one weight of magnitude >= 0.1 so the range is
    nonzero.
    """
    n = int(rng.integers(1, max_n + 1))
    while True:
        weights = rng.uniform(-5, 5, n)
        if np.max(np.abs(weights)) >= 0.1:
            break
    intercept = float(rng.uniform(-10, 10))
    lows = rng.uniform(-2, 0, n)
    highs = lows + rng.uniform(0.5, 3, n)
    names = [f"x{i + 1}" for i in range(n)]
    terms = [f"{float(w)!r}*{name}" for w, name in zip(weights, names)]
    text = " + ".join(terms) + f" + {intercept!r}"
    return text, weights, intercept, lows.tolist(), highs.tolist()


def random_coupled_expression(rng, max_n=4):
    """Random expression with a genuine cross-variable interaction.

    An affine part plus one coupling term (a product of two inputs, a sin
    of a weighted pair, or a min of two inputs) with an O(1) coefficient,
    so the range is strictly below the diameter sum except in the
    single-input case.  Returns (text, lows, highs).
    """
    n = int(rng.integers(1, max_n + 1))
    names = [f"x{i + 1}" for i in range(n)]
    weights = rng.uniform(-3, 3, n)
    terms = [f"{float(w)!r}*{name}" for w, name in zip(weights, names)]
    c = float(rng.uniform(0.5, 2.0))
    if n >= 2:
        i, j = rng.choice(n, size=2, replace=False)
        kind = int(rng.integers(0, 3))
        if kind == 0:
            terms.append(f"{c!r}*{names[i]}*{names[j]}")
        elif kind == 1:
            w = float(rng.uniform(0.5, 2.0))
            terms.append(f"{c!r}*sin({names[i]} + {w!r}*{names[j]})")
        else:
            terms.append(f"{c!r}*min({names[i]}, {names[j]})")
    else:
        terms.append(f"{c!r}*sin({names[0]})")
    lows = rng.uniform(-1.5, 0, n)
    highs = lows + rng.uniform(0.5, 2.0, n)
    return " + ".join(terms), lows.tolist(), highs.tolist()


def expression_fn(text, lows, highs):
    """ResponseFunction over the given box for expression ``text``."""
    domain = BoxDomain.from_bounds(zip(lows, highs))
    return expression_function(domain, text)
