import math

import pytest

from margincert import (
    BoxDomain, EvaluationError, absolute_bounds, builtin_function,
    estimate_mean, expression_function, mcdiarmid_bound, system_diameter,
    validate_bound,
)


def unit_box(n):
    return BoxDomain.from_bounds([(0.0, 1.0)] * n)


def linear(n, weights=None):
    return builtin_function(unit_box(n), "linear", weights=weights)


class TestEstimateMean:
    def test_linear_hits_exact_mean(self):
        # exact mean 2.5 by linearity of the uniform means
        f = linear(2, weights=(2.0, 3.0))
        mean_hat, se = estimate_mean(f, samples=20_000, seed=1)
        assert se < 0.02
        assert abs(mean_hat - 2.5) <= 4 * se

    def test_constant(self):
        f = expression_function(unit_box(2), "7")
        mean_hat, se = estimate_mean(f, samples=50, seed=0)
        assert mean_hat == 7.0
        assert se == 0.0

    def test_product_mean(self):
        # independence gives (1/2)^2
        f = builtin_function(unit_box(2), "product")
        mean_hat, se = estimate_mean(f, samples=20_000, seed=2)
        assert abs(mean_hat - 0.25) <= 4 * se

    def test_deterministic(self):
        a = estimate_mean(linear(3), 500, seed=9)
        b = estimate_mean(linear(3), 500, seed=9)
        assert a == b

    def test_sample_count_validated(self):
        with pytest.raises(ValueError):
            estimate_mean(linear(1), 1)

    def test_failure_budget(self):
        # log fails on around 17% of the box: far beyond the 1% allowance
        f = expression_function(BoxDomain.from_bounds([(-0.2, 1.0)]), "log(x1)")
        with pytest.raises(EvaluationError, match="failed"):
            estimate_mean(f, samples=2_000, seed=0)


class TestValidateBound:
    def test_mcdiarmid_bound_consistent_for_linear_sum(self):
        f = linear(20)
        bound = mcdiarmid_bound(0.01, system_diameter((1.0,) * 20))
        result = validate_bound(f, mean=10.0, bound=bound, epsilon=0.01,
                                samples=20_000, seed=3)
        assert result.verdict == "consistent"
        assert result.exceed_frac < 0.01

    def test_absolute_bound_never_exceeded(self):
        f = builtin_function(unit_box(3), "product")
        # exact extremes 0 and 1; exact mean 1/8
        abs_minus, abs_plus, _, _ = absolute_bounds(0.0, 1.0, 0.125)
        for direction, bound in (("plus", abs_plus), ("minus", abs_minus)):
            result = validate_bound(f, mean=0.125, bound=bound, epsilon=0.01,
                                    samples=5_000, seed=4, direction=direction)
            assert result.exceed_count == 0

    def test_zero_bound_is_detected_as_violated(self):
        # about half of all draws sit above the mean of a symmetric linear sum
        f = linear(5)
        result = validate_bound(f, mean=2.5, bound=0.0, epsilon=0.01,
                                samples=2_000, seed=5)
        assert result.verdict == "violated"
        assert 0.4 < result.exceed_frac < 0.6

    def test_slack_formula(self):
        f = linear(2)
        result = validate_bound(f, mean=1.0, bound=5.0, epsilon=0.2,
                                samples=400, seed=6)
        assert result.binomial_slack == 3.0 * math.sqrt(0.2 * 0.8 / 400)
        assert result.exceed_frac == result.exceed_count / 400

    def test_deterministic(self):
        f1, f2 = linear(4), linear(4)
        a = validate_bound(f1, 2.0, 1.0, 0.05, 500, seed=7)
        b = validate_bound(f2, 2.0, 1.0, 0.05, 500, seed=7)
        assert a == b

    def test_minimum_samples(self):
        with pytest.raises(ValueError):
            validate_bound(linear(1), 0.5, 1.0, 0.1, 99)

    def test_direction_validated(self):
        with pytest.raises(ValueError):
            validate_bound(linear(1), 0.5, 1.0, 0.1, 100, direction="sideways")

    def test_conservative_at_scale(self):
        # equal-weight linear sums stay under target exceedance at n >= 20
        for eps in (0.1, 0.01):
            bound = mcdiarmid_bound(eps, system_diameter((1.0,) * 20))
            for seed in range(1, 11):
                f = linear(20)
                result = validate_bound(f, mean=10.0, bound=bound, epsilon=eps,
                                        samples=2_000, seed=seed)
                assert result.exceed_frac <= eps
