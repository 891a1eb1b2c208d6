"""Parser and evaluator for the scalar expressions that define response functions.

Grammar (whitespace between tokens is ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME '(' expr (',' expr)* ')' | NAME | '(' expr ')'

``^`` binds tightest and associates to the right, then unary minus, then
``*`` and ``/``, then ``+`` and ``-``.  NUMBER is an unsigned decimal with
an optional fraction and exponent.  NAME is a variable reference unless it
is directly followed by ``(``, in which case it must be one of the known
functions: sin, cos, tan, exp, log, sqrt, abs (one argument) and min, max
(two arguments).  log is the natural logarithm.

Parsed trees are immutable and evaluation is pure, so expressions can be
shared freely between threads.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .errors import EvaluationError, ParseError

__all__ = [
    "Num", "Var", "Neg", "BinOp", "Call", "Expression",
    "FUNCTIONS", "parse", "evaluate", "unparse", "variables",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expression"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expression", ...]


Expression = Union[Num, Var, Neg, BinOp, Call]

#: Known function names and their arity.
FUNCTIONS = {
    "sin": 1, "cos": 1, "tan": 1, "exp": 1, "log": 1,
    "sqrt": 1, "abs": 1, "min": 2, "max": 2,
}

_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class _Token:
    kind: str  # num | name | op | lparen | rparen | comma | end
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
        elif ch == ",":
            tokens.append(_Token("comma", ch, i))
            i += 1
        else:
            m = _NUMBER.match(text, i)
            if m:
                tokens.append(_Token("num", m.group(), i))
                i = m.end()
                continue
            m = _NAME.match(text, i)
            if m:
                tokens.append(_Token("name", m.group(), i))
                i = m.end()
                continue
            raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._i = 0

    def peek(self) -> _Token:
        return self._tokens[self._i]

    def take(self) -> _Token:
        tok = self._tokens[self._i]
        self._i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ParseError(f"expected {what}, found {shown!r}", tok.pos)
        return self.take()

    def parse_expr(self) -> Expression:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expression:
        node = self.parse_unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expression:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Expression:
        base = self.parse_atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            return BinOp("^", base, self.parse_unary())
        return base

    def parse_atom(self) -> Expression:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "lparen":
            node = self.parse_expr()
            self.expect("rparen", "')'")
            return node
        if tok.kind == "name":
            if self.peek().kind != "lparen":
                return Var(tok.text)
            if tok.text not in FUNCTIONS:
                raise ParseError(f"unknown function {tok.text!r}", tok.pos)
            self.take()  # lparen
            args = [self.parse_expr()]
            while self.peek().kind == "comma":
                self.take()
                args.append(self.parse_expr())
            close = self.expect("rparen", "')'")
            arity = FUNCTIONS[tok.text]
            if len(args) != arity:
                raise ParseError(
                    f"{tok.text} takes {arity} argument(s), got {len(args)}",
                    close.pos,
                )
            return Call(tok.text, tuple(args))
        shown = tok.text or "end of input"
        raise ParseError(f"expected a value, found {shown!r}", tok.pos)


def parse(text: str) -> Expression:
    """Parse ``text`` into an expression tree.

    Raises ParseError (with a 0-based character offset) for empty input,
    unknown characters or functions, arity mismatches, and unbalanced
    parentheses.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    parser = _Parser(_tokenize(text))
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "end":
        raise ParseError(f"unexpected {trailing.text!r}", trailing.pos)
    return node


def variables(expr: Expression) -> frozenset[str]:
    """Names of all variables referenced by ``expr``."""
    out: set[str] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, Neg):
            stack.append(node.operand)
        elif isinstance(node, BinOp):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, Call):
            stack.extend(node.args)
    return frozenset(out)


def evaluate(expr: Expression, point: Mapping[str, float]) -> float:
    """Evaluate ``expr`` with variables bound from ``point``.

    Standard real arithmetic; log is natural.  Raises EvaluationError,
    carrying the offending point, for unbound variables, division by zero,
    log of a nonpositive value, sqrt of a negative value, a negative base
    raised to a non-integer power, and any nonfinite result.  Never lets a
    NaN propagate silently.
    """
    return _eval(expr, point)


def _fail(message: str, point: Mapping[str, float]):
    raise EvaluationError(message, dict(point))


def _finite(value: float, what: str, point: Mapping[str, float]) -> float:
    if not math.isfinite(value):
        _fail(f"nonfinite result in {what}", point)
    return value


def _eval(expr: Expression, point: Mapping[str, float]) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Var):
        try:
            return point[expr.name]
        except KeyError:
            _fail(f"unbound variable {expr.name!r}", point)
    if isinstance(expr, Neg):
        return -_eval(expr.operand, point)
    if isinstance(expr, BinOp):
        left = _eval(expr.left, point)
        right = _eval(expr.right, point)
        op = expr.op
        if op == "+":
            return _finite(left + right, "addition", point)
        if op == "-":
            return _finite(left - right, "subtraction", point)
        if op == "*":
            return _finite(left * right, "multiplication", point)
        if op == "/":
            if right == 0.0:
                _fail("division by zero", point)
            return _finite(left / right, "division", point)
        # op == "^"
        try:
            return _finite(math.pow(left, right), "power", point)
        except ValueError:
            _fail(f"invalid power: {left!r} ^ {right!r}", point)
        except OverflowError:
            _fail("overflow in power", point)
    # Call
    args = [_eval(a, point) for a in expr.args]
    fn = expr.fn
    if fn == "log":
        if args[0] <= 0.0:
            _fail(f"log of nonpositive value {args[0]!r}", point)
        return math.log(args[0])
    if fn == "sqrt":
        if args[0] < 0.0:
            _fail(f"sqrt of negative value {args[0]!r}", point)
        return math.sqrt(args[0])
    if fn == "exp":
        try:
            return _finite(math.exp(args[0]), "exp", point)
        except OverflowError:
            _fail("overflow in exp", point)
    if fn == "abs":
        return abs(args[0])
    if fn == "min":
        return min(args)
    if fn == "max":
        return max(args)
    # sin / cos / tan
    return _finite(getattr(math, fn)(args[0]), fn, point)


# Precedence levels used by the printer; must mirror the grammar above.
_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5


def _prec(expr: Expression) -> int:
    if isinstance(expr, (Num, Var, Call)):
        return _ATOM
    if isinstance(expr, Neg):
        return _NEG
    return {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}[expr.op]


def unparse(expr: Expression) -> str:
    """Render ``expr`` as text that reparses to a structurally identical tree."""
    if isinstance(expr, Num):
        return repr(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Neg):
        inner = unparse(expr.operand)
        if _prec(expr.operand) < _NEG:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(expr, BinOp):
        lhs, rhs = unparse(expr.left), unparse(expr.right)
        lp, rp = _prec(expr.left), _prec(expr.right)
        mine = _prec(expr)
        if expr.op == "^":
            # grammar: power := atom '^' unary
            if lp < _ATOM:
                lhs = f"({lhs})"
            if rp < _NEG:
                rhs = f"({rhs})"
        else:
            if lp < mine:
                lhs = f"({lhs})"
            # left-associative ops: an equal-precedence right child must be
            # parenthesized to preserve the tree shape
            if rp <= mine:
                rhs = f"({rhs})"
        return f"{lhs} {expr.op} {rhs}" if expr.op in "+-" else f"{lhs}{expr.op}{rhs}"
    return f"{expr.fn}({', '.join(unparse(a) for a in expr.args)})"
