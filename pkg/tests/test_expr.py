import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from margincert import EvaluationError, ParseError, evaluate, parse, unparse, variables
from margincert.expr import BinOp, Call, Neg, Num, Var


class TestParse:
    def test_two_token_product(self):
        assert parse("x1*x2") == BinOp("*", Var("x1"), Var("x2"))

    def test_unary_minus_binds_below_power(self):
        # -x1^2 is -(x1^2)
        tree = parse("-x1^2")
        assert tree == Neg(BinOp("^", Var("x1"), Num(2.0)))
        assert evaluate(tree, {"x1": 2.0}) == -4.0

    def test_function_call(self):
        tree = parse("min(x1, 1 - x2)")
        assert tree == Call("min", (Var("x1"), BinOp("-", Num(1.0), Var("x2"))))

    def test_power_right_associative(self):
        assert evaluate(parse("2^3^2"), {}) == 512.0

    def test_left_associative_division(self):
        assert evaluate(parse("6/3/2"), {}) == 1.0

    def test_standard_precedence(self):
        assert evaluate(parse("2+3*4"), {}) == 14.0
        assert evaluate(parse("(2+3)*4"), {}) == 20.0
        assert evaluate(parse("2*3+4"), {}) == 10.0

    def test_whitespace_insensitive(self):
        assert parse(" x1 *\tx2 ") == parse("x1*x2")

    def test_scientific_notation(self):
        assert parse("1.5e-3") == Num(1.5e-3)

    def test_negative_exponent(self):
        assert evaluate(parse("2^-1"), {}) == 0.5


class TestParseErrors:
    def test_empty(self):
        with pytest.raises(ParseError) as err:
            parse("   ")
        assert err.value.offset == 0

    def test_unknown_function(self):
        with pytest.raises(ParseError, match="unknown function 'foo'") as err:
            parse("foo(x1)")
        assert err.value.offset == 0

    def test_wrong_arity(self):
        with pytest.raises(ParseError, match="min takes 2"):
            parse("min(x1)")

    def test_unbalanced_open(self):
        with pytest.raises(ParseError) as err:
            parse("(x1")
        assert err.value.offset == 3

    def test_unbalanced_close(self):
        with pytest.raises(ParseError) as err:
            parse("x1)")
        assert err.value.offset == 2

    def test_dangling_operator(self):
        with pytest.raises(ParseError):
            parse("x1 +")

    def test_unknown_character(self):
        with pytest.raises(ParseError) as err:
            parse("x1 @ x2")
        assert err.value.offset == 3


class TestEvaluate:
    def test_product(self):
        assert evaluate(parse("x1*x2"), {"x1": 0.5, "x2": 0.5}) == 0.25

    def test_linear(self):
        assert evaluate(parse("2*x1 + 3*x2"), {"x1": 1.0, "x2": 1.0}) == 5.0

    def test_log_is_natural(self):
        assert evaluate(parse("log(x1)"), {"x1": math.e}) == pytest.approx(1.0, rel=1e-15)

    def test_log_domain_error_carries_point(self):
        with pytest.raises(EvaluationError) as err:
            evaluate(parse("log(x1)"), {"x1": 0.0})
        assert err.value.point == {"x1": 0.0}

    def test_sqrt_negative(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("sqrt(x1)"), {"x1": -1.0})

    def test_division_by_zero(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("1/x1"), {"x1": 0.0})

    def test_negative_base_fractional_power(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("x1^0.5"), {"x1": -8.0})

    def test_negative_base_integer_power_ok(self):
        assert evaluate(parse("x1^3"), {"x1": -2.0}) == -8.0

    def test_unbound_variable(self):
        with pytest.raises(EvaluationError, match="unbound variable"):
            evaluate(parse("x1 + zz"), {"x1": 1.0})

    def test_overflow_is_an_error(self):
        with pytest.raises(EvaluationError):
            evaluate(parse("exp(x1)"), {"x1": 1e6})

    def test_no_silent_nan(self):
        # 1e308*10 - 1e308*10 would silently give nan with bare floats
        with pytest.raises(EvaluationError):
            evaluate(parse("x1*10 - x1*10"), {"x1": 1e308})

    def test_deterministic(self):
        tree = parse("sin(x1) + cos(x2)*x1")
        point = {"x1": 0.3, "x2": 1.7}
        assert evaluate(tree, point) == evaluate(tree, point)

    def test_variables(self):
        assert variables(parse("min(x1, 1 - x2) + a")) == {"x1", "x2", "a"}


# Round trip: any grammar-generated tree unparsed then reparsed is identical.

_names = st.sampled_from(["x1", "x2", "y", "long_name3"])
_numbers = st.floats(min_value=0.0, max_value=1e9, allow_nan=False)
_leaves = st.one_of(_numbers.map(Num), _names.map(Var))


def _compose(children):
    unary = children.map(Neg)
    binop = st.tuples(st.sampled_from("+-*/^"), children, children).map(
        lambda t: BinOp(*t))
    one_arg = st.tuples(
        st.sampled_from(["sin", "cos", "tan", "exp", "log", "sqrt", "abs"]),
        children,
    ).map(lambda t: Call(t[0], (t[1],)))
    two_arg = st.tuples(st.sampled_from(["min", "max"]), children, children).map(
        lambda t: Call(t[0], (t[1], t[2])))
    return st.one_of(unary, binop, one_arg, two_arg)


_trees = st.recursive(_leaves, _compose, max_leaves=25)


@given(_trees)
@settings(max_examples=300)
def test_unparse_parse_round_trip(tree):
    assert parse(unparse(tree)) == tree


@given(_trees)
def test_unbalanced_paren_always_rejected(tree):
    with pytest.raises(ParseError):
        parse("(" + unparse(tree))
