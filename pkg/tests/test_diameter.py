import math

import numpy as np
import pytest

from helpers import expression_fn, pairwise_diameters, random_coupled_expression
from margincert import (
    BoxDomain, BudgetExceededError, DomainMismatchError, EvaluationError,
    builtin_function, estimate_auto, estimate_grid, estimate_multistart,
    estimate_vertex, expression_function, merge,
)
from margincert.diameter import DiameterEstimate, WitnessPair


def unit_box(n):
    return BoxDomain.from_bounds([(0.0, 1.0)] * n)


def linear_2_3():
    return builtin_function(unit_box(2), "linear", weights=(2.0, 3.0))


class TestVertex:
    def test_product_counterexample(self):
        # range 1 but diameter sum n: the additive bound is loose here
        f = builtin_function(unit_box(3), "product")
        est = estimate_vertex(f, monotone=True)
        assert est.D == (1.0, 1.0, 1.0)
        assert est.delta_F == 1.0
        assert est.exactness == "exact"
        assert est.budget_used == 8

    def test_linear_matches_pairwise_oracle(self):
        est = estimate_vertex(linear_2_3())
        # oracle: brute-force pair scan on an 11-level grid
        D, f_min, f_max = pairwise_diameters(
            lambda p: 2 * p[0] + 3 * p[1], (0, 0), (1, 1), levels=11)
        assert est.D == tuple(D) == (2.0, 3.0)
        assert (est.F_min, est.F_max) == (f_min, f_max) == (0.0, 5.0)

    def test_constant(self):
        f = expression_function(unit_box(2), "7")
        est = estimate_vertex(f)
        assert est.D == (0.0, 0.0)
        assert est.delta_F == 0.0

    def test_limit_exceeded(self):
        f = builtin_function(unit_box(21), "product")
        with pytest.raises(BudgetExceededError):
            estimate_vertex(f)

    def test_not_exact_without_monotone_flag(self):
        est = estimate_vertex(builtin_function(unit_box(2), "product"))
        assert est.exactness == "lower-estimate"

    def test_evaluation_failure_propagates(self):
        f = expression_function(BoxDomain.from_bounds([(-1.0, 1.0)]), "log(x1)")
        with pytest.raises(EvaluationError):
            estimate_vertex(f)


class TestGrid:
    def test_four_point_enumeration(self):
        # hand enumeration: values 0, 0, 0, 1 at the corners
        est = estimate_grid(expression_fn("x1*x2", (0, 0), (1, 1)), resolution=2)
        assert est.D == (1.0, 1.0)
        assert est.delta_F == 1.0

    def test_linear_resolution_3(self):
        est = estimate_grid(linear_2_3(), resolution=3)
        assert est.D == (2.0, 3.0)

    def test_resolution_2_equals_vertex(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            text, lows, highs = random_coupled_expression(rng)
            grid = estimate_grid(expression_fn(text, lows, highs), 2)
            vert = estimate_vertex(expression_fn(text, lows, highs))
            assert grid.D == vert.D
            assert (grid.F_min, grid.F_max) == (vert.F_min, vert.F_max)

    def test_matches_pairwise_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            text, lows, highs = random_coupled_expression(rng, max_n=3)
            f = expression_fn(text, lows, highs)
            est = estimate_grid(f, resolution=4)
            oracle = expression_fn(text, lows, highs)
            D, f_min, f_max = pairwise_diameters(
                oracle.eval_at, lows, highs, levels=4)
            assert est.D == pytest.approx(D, rel=1e-12, abs=1e-15)
            assert est.F_min == pytest.approx(f_min, rel=1e-12, abs=1e-15)
            assert est.F_max == pytest.approx(f_max, rel=1e-12, abs=1e-15)

    def test_budget(self):
        f = builtin_function(unit_box(4), "product")
        with pytest.raises(BudgetExceededError):
            estimate_grid(f, resolution=100, max_points=10_000)

    def test_resolution_validated(self):
        with pytest.raises(ValueError):
            estimate_grid(builtin_function(unit_box(1), "product"), 1)

    def test_telescoping_on_random_functions(self):
        # range never exceeds the diameter sum on any product grid
        rng = np.random.default_rng(23)
        for _ in range(25):
            text, lows, highs = random_coupled_expression(rng)
            est = estimate_grid(expression_fn(text, lows, highs), 5)
            assert est.delta_F <= math.fsum(est.D)


class TestMultistart:
    @pytest.mark.parametrize("seed", [0, 1, 17])
    def test_linear_reaches_exact_diameters(self, seed):
        est = estimate_multistart(linear_2_3(), starts=8, iters=20, seed=seed)
        assert est.D == pytest.approx((2.0, 3.0), abs=1e-6)
        assert est.F_min == pytest.approx(0.0, abs=1e-6)
        assert est.F_max == pytest.approx(5.0, abs=1e-6)

    def test_constant_is_zero_exactly(self):
        f = expression_function(unit_box(3), "4.25")
        est = estimate_multistart(f, starts=2, iters=5, seed=1)
        assert est.D == (0.0, 0.0, 0.0)

    def test_product_5d(self):
        f = builtin_function(unit_box(5), "product")
        est = estimate_multistart(f, starts=16, iters=30, seed=0)
        assert all(d >= 0.99 for d in est.D)

    def test_deterministic(self):
        a = estimate_multistart(linear_2_3(), 4, 10, seed=3)
        b = estimate_multistart(linear_2_3(), 4, 10, seed=3)
        assert a == b

    def test_seed_matters(self):
        f1 = expression_fn("sin(3*x1) * x2", (0, 0), (3, 1))
        f2 = expression_fn("sin(3*x1) * x2", (0, 0), (3, 1))
        a = estimate_multistart(f1, 2, 4, seed=1)
        b = estimate_multistart(f2, 2, 4, seed=2)
        assert a.min_witness != b.min_witness or a.D != b.D

    def test_failed_probes_counted_and_flagged(self):
        # log fails on half the box, so well over 10% of probes fail
        f = expression_function(BoxDomain.from_bounds([(-1.0, 1.0)]), "log(x1)")
        est = estimate_multistart(f, starts=6, iters=10, seed=0)
        assert est.failed_evals > 0
        assert est.unreliable
        assert est.D[0] > 0  # still found spread on the valid half

    def test_params_validated(self):
        with pytest.raises(ValueError):
            estimate_multistart(linear_2_3(), 0, 5)
        with pytest.raises(ValueError):
            estimate_multistart(linear_2_3(), 5, 0)


class TestMonotoneBudgets:
    """Lower estimates never decrease when the budget is enlarged."""

    def test_grid_nested_resolutions(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            text, lows, highs = random_coupled_expression(rng)
            coarse = estimate_grid(expression_fn(text, lows, highs), 3)
            fine = estimate_grid(expression_fn(text, lows, highs), 5)  # 4 % 2 == 0
            assert all(df >= dc for df, dc in zip(fine.D, coarse.D))
            assert fine.delta_F >= coarse.delta_F

    def test_multistart_more_starts(self):
        f1 = expression_fn("sin(4*x1)*x2 + x1", (0, 0), (3, 2))
        f2 = expression_fn("sin(4*x1)*x2 + x1", (0, 0), (3, 2))
        small = estimate_multistart(f1, starts=2, iters=12, seed=7)
        large = estimate_multistart(f2, starts=6, iters=12, seed=7)
        assert all(dl >= ds for dl, ds in zip(large.D, small.D))
        assert large.delta_F >= small.delta_F

    def test_multistart_more_iters(self):
        f1 = expression_fn("sin(4*x1)*x2 + x1", (0, 0), (3, 2))
        f2 = expression_fn("sin(4*x1)*x2 + x1", (0, 0), (3, 2))
        short = estimate_multistart(f1, starts=3, iters=4, seed=7)
        long = estimate_multistart(f2, starts=3, iters=25, seed=7)
        assert all(dl >= ds for dl, ds in zip(long.D, short.D))
        assert long.delta_F >= short.delta_F


class TestWitnesses:
    @pytest.mark.parametrize("method", ["vertex", "grid", "multistart"])
    def test_witnesses_reproduce_values(self, method):
        rng = np.random.default_rng(43)
        for _ in range(5):
            text, lows, highs = random_coupled_expression(rng, max_n=3)
            f = expression_fn(text, lows, highs)
            if method == "vertex":
                est = estimate_vertex(f)
            elif method == "grid":
                est = estimate_grid(f, 4)
            else:
                est = estimate_multistart(f, 3, 10, seed=2)
            fresh = expression_fn(text, lows, highs)
            for i, w in enumerate(est.witnesses):
                # pair differs only in coordinate i
                for k, (ak, bk) in enumerate(zip(w.a, w.b)):
                    if k != i:
                        assert ak == bk
                achieved = abs(fresh.eval_at(w.a) - fresh.eval_at(w.b))
                assert achieved == pytest.approx(est.D[i], rel=1e-9, abs=1e-12)
            assert fresh.eval_at(est.min_witness) == pytest.approx(
                est.F_min, rel=1e-9, abs=1e-12)
            assert fresh.eval_at(est.max_witness) == pytest.approx(
                est.F_max, rel=1e-9, abs=1e-12)


class TestMerge:
    def test_idempotent(self):
        est = estimate_vertex(linear_2_3())
        assert merge(est, est) == est

    def test_dominates_both_inputs(self):
        f = builtin_function(unit_box(3), "interaction", coupling=2.0)
        a = estimate_vertex(f)
        b = estimate_grid(builtin_function(unit_box(3), "interaction", coupling=2.0), 3)
        m = merge(a, b)
        for i in range(3):
            assert m.D[i] >= a.D[i] and m.D[i] >= b.D[i]
        assert m.F_min <= min(a.F_min, b.F_min)
        assert m.F_max >= max(a.F_max, b.F_max)

    def test_coordinatewise_max(self):
        domain = unit_box(2)
        pair = WitnessPair((0.0, 0.0), (0.0, 0.0), 0.0)
        base = dict(domain=domain, F_min=0.0, F_max=1.0, method="vertex",
                    budget_used=4, min_witness=(0.0, 0.0), max_witness=(1.0, 1.0),
                    exact=False)
        a = DiameterEstimate(D=(1.0, 0.0),
                             witnesses=(WitnessPair((0, 0), (1, 0), 1.0), pair),
                             **base)
        b = DiameterEstimate(D=(0.0, 1.0),
                             witnesses=(pair, WitnessPair((0, 0), (0, 1), 1.0)),
                             **base)
        m = merge(a, b)
        assert m.D == (1.0, 1.0)
        assert m.witnesses[0] == a.witnesses[0]
        assert m.witnesses[1] == b.witnesses[1]

    def test_exactness_survives(self):
        f = builtin_function(unit_box(2), "product")
        exact = estimate_vertex(builtin_function(unit_box(2), "product"), monotone=True)
        rough = estimate_grid(f, 3)
        assert merge(exact, rough).exact
        assert not merge(rough, rough).exact if rough != rough else True

    def test_domain_mismatch(self):
        a = estimate_vertex(builtin_function(unit_box(2), "product"))
        b = estimate_vertex(builtin_function(unit_box(3), "product"))
        with pytest.raises(DomainMismatchError):
            merge(a, b)


class TestAuto:
    def test_small_n_uses_vertex(self):
        est = estimate_auto(builtin_function(unit_box(3), "product"))
        assert est.method == "vertex"

    def test_large_n_uses_multistart(self):
        est = estimate_auto(builtin_function(unit_box(13), "linear"), seed=1)
        assert est.method == "multistart:16,30"
