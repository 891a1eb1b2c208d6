"""Response functions over box domains: backends, caching, accounting.

A BoxDomain declares the ordered, named, bounded inputs together with
their sampling distributions.  A ResponseFunction wraps one of three
backends (parsed expression, external command, builtin test family)
behind a single ``eval_at`` with bit-exact caching and an exact
invocation count.  ``eval_at`` is safe for concurrent use: the cache
behaves as one atomic map and accounting stays exact under any
interleaving.

External command wire protocol (bit-exact): one evaluation per process
invocation; the input vector is written to standard input as one line of
space-separated decimal reals in declared variable order, terminated by
a newline; the command must print the scalar result as a decimal real on
the first line of standard output.  A nonzero exit status or an
unparsable first line is an evaluation failure.
"""

from __future__ import annotations

import itertools
import math
import struct
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import BudgetExceededError, EvaluationError
from .expr import Expression, evaluate, parse, unparse, variables

__all__ = [
    "Uniform", "Triangular", "PointMass", "Distribution",
    "InputSpec", "BoxDomain", "ResponseFunction",
    "corners", "sample",
    "expression_function", "command_function", "builtin_function",
    "BUILTIN_NAMES", "DEFAULT_VERTEX_LIMIT",
]

#: Largest input count for which full vertex enumeration is allowed.
DEFAULT_VERTEX_LIMIT = 20

#: Builtin response families selectable in problem configs.
BUILTIN_NAMES = ("linear", "product", "interaction")


@dataclass(frozen=True)
class Uniform:
    """Uniform sampling over [lo, hi]."""


@dataclass(frozen=True)
class Triangular:
    """Triangular sampling over [lo, hi] with the given mode."""

    mode: float


@dataclass(frozen=True)
class PointMass:
    """Degenerate sampling: every draw equals ``value``."""

    value: float


Distribution = Union[Uniform, Triangular, PointMass]


@dataclass(frozen=True)
class InputSpec:
    name: str
    lo: float
    hi: float
    dist: Distribution = Uniform()


@dataclass(frozen=True)
class BoxDomain:
    """Ordered, named, bounded inputs of a response function.

    Invariants checked at construction: the list is nonempty, names are
    unique, lo <= hi with both finite, and every sampling distribution is
    supported inside [lo, hi].
    """

    inputs: tuple[InputSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if not self.inputs:
            raise ValueError("domain must declare at least one input")
        seen = set()
        for spec in self.inputs:
            if spec.name in seen:
                raise ValueError(f"duplicate input name {spec.name!r}")
            seen.add(spec.name)
            if not (math.isfinite(spec.lo) and math.isfinite(spec.hi)):
                raise ValueError(f"input {spec.name!r} must have finite bounds")
            if spec.lo > spec.hi:
                raise ValueError(
                    f"input {spec.name!r} has lo {spec.lo!r} > hi {spec.hi!r}"
                )
            if isinstance(spec.dist, Triangular):
                if not spec.lo <= spec.dist.mode <= spec.hi:
                    raise ValueError(
                        f"triangular mode {spec.dist.mode!r} outside "
                        f"[{spec.lo!r}, {spec.hi!r}] for input {spec.name!r}"
                    )
            elif isinstance(spec.dist, PointMass):
                if not spec.lo <= spec.dist.value <= spec.hi:
                    raise ValueError(
                        f"point mass {spec.dist.value!r} outside "
                        f"[{spec.lo!r}, {spec.hi!r}] for input {spec.name!r}"
                    )

    @classmethod
    def from_bounds(cls, bounds: Iterable[tuple[float, float]],
                    names: Sequence[str] | None = None) -> "BoxDomain":
        """Build a domain from (lo, hi) pairs; names default to x1..xn."""
        bounds = list(bounds)
        if names is None:
            names = [f"x{i + 1}" for i in range(len(bounds))]
        return cls(tuple(
            InputSpec(name, float(lo), float(hi))
            for name, (lo, hi) in zip(names, bounds)
        ))

    @property
    def n(self) -> int:
        return len(self.inputs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(spec.name for spec in self.inputs)

    @property
    def lows(self) -> tuple[float, ...]:
        return tuple(spec.lo for spec in self.inputs)

    @property
    def highs(self) -> tuple[float, ...]:
        return tuple(spec.hi for spec in self.inputs)

    def midpoint(self) -> tuple[float, ...]:
        return tuple(0.5 * (s.lo + s.hi) for s in self.inputs)


def corners(domain: BoxDomain, limit: int = DEFAULT_VERTEX_LIMIT) -> Iterator[tuple[float, ...]]:
    """All 2^n box vertices, each exactly once, in lexicographic lo/hi order.

    Refuses domains with more than ``limit`` inputs; use grid or
    multistart estimation for those.
    """
    if domain.n > limit:
        raise BudgetExceededError(
            f"{domain.n} inputs exceed the vertex limit of {limit} "
            f"(2^{domain.n} corners); use grid or multistart estimation instead"
        )
    return itertools.product(*((s.lo, s.hi) for s in domain.inputs))


def sample(domain: BoxDomain, count: int,
           seed: int | np.random.SeedSequence) -> np.ndarray:
    """Draw ``count`` points, each coordinate independently per its dist.

    Deterministic given ``seed``.  Returns an array of shape (count, n).
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)
    cols = [_draw_column(rng, spec, count) for spec in domain.inputs]
    return np.column_stack(cols)


def _draw_column(rng: np.random.Generator, spec: InputSpec, count: int) -> np.ndarray:
    if isinstance(spec.dist, PointMass):
        return np.full(count, spec.dist.value)
    if spec.lo == spec.hi:
        return np.full(count, spec.lo)
    if isinstance(spec.dist, Triangular):
        return rng.triangular(spec.lo, spec.dist.mode, spec.hi, count)
    return rng.uniform(spec.lo, spec.hi, count)


class ExpressionBackend:
    """Evaluates a parsed expression with inputs bound in declared order."""

    kind = "expression"
    supports_parallel = False  # pure-python evaluation gains nothing from threads

    def __init__(self, expression: Expression):
        self.expression = expression
        self._names: tuple[str, ...] = ()

    def bind(self, domain: BoxDomain) -> None:
        unknown = variables(self.expression) - set(domain.names)
        if unknown:
            raise ValueError(
                f"expression references undeclared variables: {sorted(unknown)}"
            )
        self._names = domain.names

    def __call__(self, x: tuple[float, ...]) -> float:
        return evaluate(self.expression, dict(zip(self._names, x)))

    def describe(self) -> dict:
        return {"type": "expression", "text": unparse(self.expression)}


class CommandBackend:
    """Runs an external command once per evaluation (protocol above)."""

    kind = "command"
    supports_parallel = True

    def __init__(self, argv: Sequence[str], timeout: float | None = None):
        self.argv = tuple(str(a) for a in argv)
        self.timeout = timeout

    def bind(self, domain: BoxDomain) -> None:
        if not self.argv:
            raise ValueError("command backend requires a nonempty argv")

    def __call__(self, x: tuple[float, ...]) -> float:
        line = " ".join(repr(v) for v in x) + "\n"
        try:
            proc = subprocess.run(
                self.argv, input=line, capture_output=True, text=True,
                timeout=self.timeout,
            )
        except OSError as err:
            raise EvaluationError(f"command failed to start: {err}", x)
        except subprocess.TimeoutExpired:
            raise EvaluationError(
                f"command timed out after {self.timeout} s", x
            )
        if proc.returncode != 0:
            detail = proc.stderr.strip().splitlines()
            suffix = f": {detail[0]}" if detail else ""
            raise EvaluationError(
                f"command exited with status {proc.returncode}{suffix}", x
            )
        lines = proc.stdout.splitlines()
        first = lines[0].strip() if lines else ""
        try:
            return float(first)
        except ValueError:
            raise EvaluationError(f"unparsable command output {first!r}", x)

    def describe(self) -> dict:
        return {"type": "command", "argv": list(self.argv)}


class LinearBackend:
    """Weighted sum of the inputs; weights default to all ones."""

    kind = "builtin"
    supports_parallel = False

    def __init__(self, weights: Sequence[float] | None = None):
        self.weights = None if weights is None else tuple(float(w) for w in weights)

    def bind(self, domain: BoxDomain) -> None:
        if self.weights is None:
            self.weights = (1.0,) * domain.n
        elif len(self.weights) != domain.n:
            raise ValueError(
                f"linear backend has {len(self.weights)} weights "
                f"for {domain.n} inputs"
            )

    def __call__(self, x: tuple[float, ...]) -> float:
        return math.fsum(w * v for w, v in zip(self.weights, x))

    def describe(self) -> dict:
        return {"type": "builtin", "name": "linear", "weights": list(self.weights or ())}


class ProductBackend:
    """Product of all inputs."""

    kind = "builtin"
    supports_parallel = False

    def bind(self, domain: BoxDomain) -> None:
        pass

    def __call__(self, x: tuple[float, ...]) -> float:
        return math.prod(x)

    def describe(self) -> dict:
        return {"type": "builtin", "name": "product"}


class InteractionBackend:
    """Weighted sum plus a single full interaction term.

    F(x) = sum_i w_i x_i + coupling * prod_i x_i.  Interpolates between
    the purely additive family (coupling 0) and a strongly coupled one.
    """

    kind = "builtin"
    supports_parallel = False

    def __init__(self, weights: Sequence[float] | None = None, coupling: float = 1.0):
        self.weights = None if weights is None else tuple(float(w) for w in weights)
        self.coupling = float(coupling)

    def bind(self, domain: BoxDomain) -> None:
        if self.weights is None:
            self.weights = (1.0,) * domain.n
        elif len(self.weights) != domain.n:
            raise ValueError(
                f"interaction backend has {len(self.weights)} weights "
                f"for {domain.n} inputs"
            )

    def __call__(self, x: tuple[float, ...]) -> float:
        return math.fsum(w * v for w, v in zip(self.weights, x)) + self.coupling * math.prod(x)

    def describe(self) -> dict:
        return {
            "type": "builtin", "name": "interaction",
            "weights": list(self.weights or ()), "coupling": self.coupling,
        }


class ResponseFunction:
    """Evaluatable scalar function over a BoxDomain with caching.

    The cache key is the exact bit pattern of the (clamped) input vector,
    so equal vectors always return the identical value and the invocation
    count excludes cache hits.  Inputs outside the box by more than a
    1e-12 relative tolerance are rejected; inputs within the tolerance
    are clamped onto the boundary.
    """

    def __init__(self, domain: BoxDomain, backend, max_workers: int = 1):
        backend.bind(domain)
        self.domain = domain
        self.backend = backend
        self.max_workers = max(1, int(max_workers))
        self._packer = struct.Struct(f"<{domain.n}d")
        self._lock = threading.Lock()
        self._cache: dict[bytes, float] = {}
        self._count = 0

    @property
    def eval_count(self) -> int:
        """Number of backend invocations so far (cache hits excluded)."""
        with self._lock:
            return self._count

    @property
    def cache(self) -> dict:
        """The value cache; treat as read-only."""
        return self._cache

    def _admit(self, x: Sequence[float]) -> tuple[float, ...]:
        if len(x) != self.domain.n:
            raise ValueError(
                f"point has {len(x)} coordinates, domain has {self.domain.n}"
            )
        out = []
        for spec, raw in zip(self.domain.inputs, x):
            v = float(raw)
            if math.isnan(v):
                raise ValueError(f"input {spec.name!r} is NaN")
            tol = 1e-12 * max(1.0, abs(spec.lo), abs(spec.hi))
            if v < spec.lo - tol or v > spec.hi + tol:
                raise ValueError(
                    f"input {spec.name}={v!r} outside [{spec.lo!r}, {spec.hi!r}]"
                )
            out.append(min(max(v, spec.lo), spec.hi))
        return tuple(out)

    def eval_at(self, x: Sequence[float]) -> float:
        """Evaluate at ``x``, consulting and updating the cache."""
        point = self._admit(x)
        key = self._packer.pack(*point)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        try:
            value = float(self.backend(point))
        except EvaluationError as err:
            with self._lock:
                self._count += 1
            if err.point is None:
                err.point = point
            raise
        if not math.isfinite(value):
            with self._lock:
                self._count += 1
            raise EvaluationError(f"backend returned nonfinite value {value!r}", point)
        with self._lock:
            self._count += 1
            self._cache[key] = value
        return value

    def eval_many(self, points: Iterable[Sequence[float]]) -> list[float]:
        """Evaluate many points, preserving order.

        Duplicate points are evaluated once.  Command-backed functions
        run up to ``max_workers`` invocations in parallel; results are
        identical to sequential execution.
        """
        admitted = [self._admit(p) for p in points]
        index: dict[bytes, int] = {}
        unique: list[tuple[float, ...]] = []
        for p in admitted:
            key = self._packer.pack(*p)
            if key not in index:
                index[key] = len(unique)
                unique.append(p)
        parallel = (
            self.max_workers > 1
            and len(unique) > 1
            and getattr(self.backend, "supports_parallel", False)
        )
        if parallel:
            with ThreadPoolExecutor(min(self.max_workers, len(unique))) as pool:
                values = list(pool.map(self.eval_at, unique))
        else:
            values = [self.eval_at(p) for p in unique]
        return [values[index[self._packer.pack(*p)]] for p in admitted]


def expression_function(domain: BoxDomain, text_or_expr: str | Expression,
                        max_workers: int = 1) -> ResponseFunction:
    """Response function backed by a parsed expression over ``domain``."""
    expression = parse(text_or_expr) if isinstance(text_or_expr, str) else text_or_expr
    return ResponseFunction(domain, ExpressionBackend(expression), max_workers)


def command_function(domain: BoxDomain, argv: Sequence[str],
                     timeout: float | None = None,
                     max_workers: int = 1) -> ResponseFunction:
    """Response function backed by an external command (wire protocol above)."""
    return ResponseFunction(domain, CommandBackend(argv, timeout), max_workers)


def builtin_function(domain: BoxDomain, name: str,
                     weights: Sequence[float] | None = None,
                     coupling: float = 1.0,
                     max_workers: int = 1) -> ResponseFunction:
    """Builtin test family: ``linear``, ``product`` or ``interaction``."""
    if name == "linear":
        backend = LinearBackend(weights)
    elif name == "product":
        backend = ProductBackend()
    elif name == "interaction":
        backend = InteractionBackend(weights, coupling)
    else:
        raise ValueError(f"unknown builtin {name!r}; expected one of {BUILTIN_NAMES}")
    return ResponseFunction(domain, backend, max_workers)
