"""Command-line front end.

Subcommands: ``diameters`` (estimate per-input diameters and range),
``certify`` (full margin certification), ``validate`` (empirical check
of a bound against sampled deviations) and ``analyze`` (everything in
one pass).  Problem configs are JSON; structured reports are emitted
with ``--format structured`` or written to ``--out``.

Exit codes: 0 success / certified / consistent, 1 not certified or
violated, 2 usage or config error, 3 evaluation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import report as rpt
from .blackbox import (
    BUILTIN_NAMES, BoxDomain, InputSpec, PointMass, ResponseFunction,
    Triangular, Uniform, builtin_function, command_function,
    expression_function,
)
from .bounds import build_summary
from .certify import DIRECTIONS, certify, usefulness_check
from .diameter import (
    DiameterEstimate, estimate_auto, estimate_grid, estimate_multistart,
    estimate_vertex,
)
from .errors import (
    BudgetExceededError, ConfigError, EvaluationError,
    InconsistentEstimateError, MargincertError,
)
from .montecarlo import estimate_mean, validate_bound

__all__ = ["main", "load_config", "ProblemConfig", "parse_method"]

DEFAULT_EPSILON = 0.005
DEFAULT_DIRECTION = "two-sided"
DEFAULT_SEED = 0
DEFAULT_SAMPLES = 10_000


@dataclass(frozen=True)
class ProblemConfig:
    name: str
    domain: BoxDomain
    function: dict
    monotone: bool
    defaults: dict
    explicit_dists: bool


def _parse_dist(raw: Any, where: str):
    if raw is None or raw == "uniform" or raw == {"type": "uniform"}:
        return Uniform()
    if isinstance(raw, dict):
        kind = raw.get("type")
        if kind == "uniform":
            return Uniform()
        if kind == "triangular":
            if "mode" not in raw:
                raise ConfigError(f"{where}: triangular dist requires 'mode'")
            return Triangular(float(raw["mode"]))
        if kind == "point-mass":
            if "value" not in raw:
                raise ConfigError(f"{where}: point-mass dist requires 'value'")
            return PointMass(float(raw["value"]))
        raise ConfigError(f"{where}: unknown dist type {kind!r}")
    raise ConfigError(f"{where}: unknown dist {raw!r}")


def load_config(path: str | Path) -> ProblemConfig:
    """Load and validate a problem config; raises ConfigError on any issue."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config {path} is not valid JSON: {err}")
    if not isinstance(raw, dict):
        raise ConfigError(f"config {path} must be a JSON object")

    inputs = raw.get("inputs")
    if not isinstance(inputs, list) or not inputs:
        raise ConfigError("config requires a nonempty 'inputs' list")
    specs = []
    explicit = False
    for i, item in enumerate(inputs):
        if not isinstance(item, dict):
            raise ConfigError(f"inputs[{i}] must be an object")
        try:
            name = item["name"]
            lo = float(item["min"])
            hi = float(item["max"])
        except KeyError as err:
            raise ConfigError(f"inputs[{i}] is missing key {err}")
        except (TypeError, ValueError):
            raise ConfigError(f"inputs[{i}] has non-numeric bounds")
        if "dist" in item:
            explicit = True
        specs.append(InputSpec(str(name), lo, hi,
                               _parse_dist(item.get("dist"), f"inputs[{i}]")))
    try:
        domain = BoxDomain(tuple(specs))
    except ValueError as err:
        raise ConfigError(str(err))

    function = raw.get("function")
    if not isinstance(function, dict) or "type" not in function:
        raise ConfigError("config requires a 'function' object with a 'type'")
    ftype = function["type"]
    if ftype == "expression":
        if not isinstance(function.get("text"), str):
            raise ConfigError("expression function requires 'text'")
    elif ftype == "command":
        argv = function.get("argv")
        if not isinstance(argv, list) or not argv:
            raise ConfigError("command function requires a nonempty 'argv' list")
    elif ftype == "builtin":
        if function.get("name") not in BUILTIN_NAMES:
            raise ConfigError(
                f"builtin function requires 'name' in {BUILTIN_NAMES}"
            )
    else:
        raise ConfigError(f"unknown function type {ftype!r}")

    defaults = raw.get("defaults", {})
    if not isinstance(defaults, dict):
        raise ConfigError("'defaults' must be an object")
    return ProblemConfig(
        name=str(raw.get("name", path.stem)),
        domain=domain,
        function=function,
        monotone=bool(raw.get("monotone", False)),
        defaults=defaults,
        explicit_dists=explicit,
    )


def build_function(config: ProblemConfig, workers: int) -> ResponseFunction:
    fn = config.function
    try:
        if fn["type"] == "expression":
            return expression_function(config.domain, fn["text"], max_workers=workers)
        if fn["type"] == "command":
            return command_function(
                config.domain, fn["argv"], timeout=fn.get("timeout"),
                max_workers=workers,
            )
        return builtin_function(
            config.domain, fn["name"],
            weights=fn.get("weights"), coupling=fn.get("coupling", 1.0),
            max_workers=workers,
        )
    except MargincertError:
        raise
    except ValueError as err:
        raise ConfigError(str(err))


def parse_method(text: str) -> tuple:
    """Parse --method: vertex | grid:R | multistart:S,I."""
    if text == "vertex":
        return ("vertex",)
    if text.startswith("grid:"):
        try:
            resolution = int(text[5:])
        except ValueError:
            raise ConfigError(f"bad grid resolution in {text!r}")
        if resolution < 2:
            raise ConfigError("grid resolution must be >= 2")
        return ("grid", resolution)
    if text.startswith("multistart:"):
        parts = text[len("multistart:"):].split(",")
        try:
            starts, iters = (int(p) for p in parts)
        except ValueError:
            raise ConfigError(f"bad multistart spec in {text!r}; expected S,I")
        if starts < 1 or iters < 1:
            raise ConfigError("multistart starts and iters must be >= 1")
        return ("multistart", starts, iters)
    raise ConfigError(
        f"unknown method {text!r}; expected vertex, grid:R or multistart:S,I"
    )


def _run_estimate(f: ResponseFunction, method: tuple | None, seed: int,
                  monotone: bool) -> DiameterEstimate:
    if method is None:
        return estimate_auto(f, seed=seed, monotone=monotone)
    if method[0] == "vertex":
        return estimate_vertex(f, monotone=monotone)
    if method[0] == "grid":
        return estimate_grid(f, method[1])
    return estimate_multistart(f, method[1], method[2], seed)


def _resolve(args, config: ProblemConfig, key: str, fallback):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in config.defaults:
        return config.defaults[key]
    return fallback


def _resolve_mean(config: ProblemConfig, f: ResponseFunction,
                  est: DiameterEstimate, samples: int, seed: int):
    """Monte Carlo mean when the config declares distributions, else the
    midpoint assumption (flagged in the report)."""
    if config.explicit_dists:
        ss = np.random.SeedSequence(seed, spawn_key=(1000,))
        mean_hat, _ = estimate_mean(f, max(samples, 2), ss)
        return mean_hat, "monte-carlo"
    return 0.5 * (est.F_min + est.F_max), "assumed-midpoint"


def _fmt(x) -> str:
    if x is None:
        return "undefined"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _print_estimate_table(est: DiameterEstimate, payload: dict, out) -> None:
    print(f"problem: {payload['problem']}   method: {est.method}   "
          f"exactness: {est.exactness}   budget: {est.budget_used} evals",
          file=out)
    if est.unreliable:
        print("WARNING: estimate unreliable (more than 10% of probes failed)",
              file=out)
    header = f"{'input':<12}{'min':>12}{'max':>12}{'D_i':>14}{'f_i^2':>10}"
    print(header, file=out)
    fsq = payload["f_squared"]
    for spec, d, q in zip(est.domain.inputs, est.D, fsq):
        print(f"{spec.name:<12}{spec.lo:>12.6g}{spec.hi:>12.6g}"
              f"{d:>14.6g}{q:>10.4f}", file=out)
    print(f"D_F = {_fmt(payload['system_diameter'])}   "
          f"n_eff = {_fmt(payload['n_eff'])}   "
          f"F_min = {_fmt(est.F_min)}   F_max = {_fmt(est.F_max)}   "
          f"delta_F = {_fmt(est.delta_F)}", file=out)
    for spec, w in zip(est.domain.inputs, est.witnesses):
        print(f"witness {spec.name}: |F(a) - F(b)| = {w.value:.6g}  "
              f"a = {tuple(round(v, 6) for v in w.a)}  "
              f"b = {tuple(round(v, 6) for v in w.b)}", file=out)


def _print_certification_table(payload: dict, out) -> None:
    s = payload["summary"]
    print(f"problem: {payload['problem']}   direction: {payload['direction']}   "
          f"margin: {_fmt(payload['margin'])}   epsilon: {_fmt(payload['epsilon'])}",
          file=out)
    print(f"range: [{_fmt(s['F_min'])}, {_fmt(s['F_max'])}]   "
          f"mean: {_fmt(s['mean'])} ({s['mean_source']})   "
          f"n_eff: {_fmt(s['n_eff'])}", file=out)
    print(f"absolute bound:   requires margin >= "
          f"{_fmt(payload['required_margin_absolute'])}   "
          f"verdict: {payload['verdict_absolute']}", file=out)
    print(f"mcdiarmid bound:  requires margin >= "
          f"{_fmt(payload['required_margin_mcdiarmid'])}   "
          f"verdict: {payload['verdict_mcdiarmid']}", file=out)
    pof = payload["claimed_pof"]
    print(f"design point: {_fmt(payload['design_point'])}   "
          f"U = {_fmt(payload['uncertainty'])}   "
          f"M/U = {_fmt(payload['confidence_ratio'])}", file=out)
    print(f"recommendation: {payload['recommendation']}   claimed POF: "
          f"{'not certified' if pof is None else _fmt(pof)}", file=out)
    for caveat in payload["caveats"]:
        print(f"note: {caveat}", file=out)


def _print_validation_table(payload: dict, out) -> None:
    print(f"problem: {payload['problem']}   bound source: "
          f"{payload['bound_source']}   seed: {payload['seed']}", file=out)
    for r in payload["results"]:
        print(f"{r['direction']:<6} bound = {_fmt(r['bound'])}   "
              f"exceedances = {r['exceed_count']}/{r['samples']} "
              f"({r['exceed_frac']:.6g})   allowed = "
              f"{r['epsilon']:.6g} + {r['binomial_slack']:.6g}   "
              f"verdict: {r['verdict']}", file=out)
    print(f"overall: {payload['verdict']}", file=out)


def _emit(payload: dict, args, out) -> None:
    if args.out:
        Path(args.out).write_text(rpt.dumps(payload))
    if args.fmt == "structured":
        out.write(rpt.dumps(payload))


def _validation_runs(f, summary, bound_source: str, direction: str,
                     epsilon: float, samples: int, seed: int) -> list:
    sides = ("plus", "minus") if direction == "two-sided" else (direction,)
    runs = []
    for k, side in enumerate(sides):
        if bound_source == "absolute":
            bound = summary.abs_plus if side == "plus" else summary.abs_minus
        else:
            bound = summary.mcd_bound
        ss = np.random.SeedSequence(seed, spawn_key=(2000, k))
        runs.append(validate_bound(f, summary.mean, bound, epsilon, samples,
                                   ss, direction=side))
    return runs


def cmd_diameters(args) -> int:
    config = load_config(args.config)
    f = build_function(config, args.workers)
    seed = int(_resolve(args, config, "seed", DEFAULT_SEED))
    method = parse_method(args.method) if args.method else _config_method(config)
    est = _run_estimate(f, method, seed, config.monotone)
    payload = rpt.estimate_payload(est, config.name, seed)
    _emit(payload, args, sys.stdout)
    if args.fmt == "table":
        _print_estimate_table(est, payload, sys.stdout)
    return 0


def _config_method(config: ProblemConfig) -> tuple | None:
    raw = config.defaults.get("method")
    return parse_method(raw) if raw else None


def _common_run(args, need_margin: bool):
    """Shared estimate + mean pipeline for certify/validate/analyze."""
    config = load_config(args.config)
    f = build_function(config, args.workers)
    seed = int(_resolve(args, config, "seed", DEFAULT_SEED))
    epsilon = float(_resolve(args, config, "epsilon", DEFAULT_EPSILON))
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon!r}")
    direction = str(_resolve(args, config, "direction", DEFAULT_DIRECTION))
    if direction not in DIRECTIONS:
        raise ConfigError(f"direction must be one of {DIRECTIONS}")
    samples = int(_resolve(args, config, "samples", DEFAULT_SAMPLES))
    margin = _resolve(args, config, "margin", None)
    if need_margin and margin is None:
        raise ConfigError("a margin is required (--margin or config defaults)")
    if margin is not None:
        margin = float(margin)
        if margin < 0:
            raise ConfigError(f"margin must be >= 0, got {margin!r}")
    method = parse_method(args.method) if args.method else _config_method(config)
    est = _run_estimate(f, method, seed, config.monotone)
    mean, mean_source = _resolve_mean(config, f, est, samples, seed)
    return config, f, est, mean, mean_source, epsilon, direction, margin, samples, seed


def cmd_certify(args) -> int:
    (config, f, est, mean, mean_source, epsilon, direction, margin,
     samples, seed) = _common_run(args, need_margin=True)
    report = certify(est, mean, margin, epsilon, direction,
                     problem=config.name, mean_source=mean_source)
    payload = rpt.certification_payload(report)
    _emit(payload, args, sys.stdout)
    if args.fmt == "table":
        _print_certification_table(payload, sys.stdout)
    return 0 if report.recommendation != "NEITHER" else 1


def cmd_validate(args) -> int:
    if args.samples is not None and args.samples < 100:
        raise ConfigError(f"--samples must be >= 100, got {args.samples}")
    (config, f, est, mean, mean_source, epsilon, direction, margin,
     samples, seed) = _common_run(args, need_margin=False)
    if samples < 100:
        raise ConfigError(f"validation needs at least 100 samples, got {samples}")
    summary = build_summary(est.D, est.F_min, est.F_max, mean, epsilon,
                            mean_source=mean_source)
    runs = _validation_runs(f, summary, args.bound_source, direction,
                            epsilon, samples, seed)
    payload = rpt.validation_payload(runs, config.name, args.bound_source, seed)
    _emit(payload, args, sys.stdout)
    if args.fmt == "table":
        _print_validation_table(payload, sys.stdout)
    return 0 if payload["verdict"] == "consistent" else 1


def cmd_analyze(args) -> int:
    (config, f, est, mean, mean_source, epsilon, direction, margin,
     samples, seed) = _common_run(args, need_margin=False)
    summary = build_summary(est.D, est.F_min, est.F_max, mean, epsilon,
                            mean_source=mean_source)
    r = margin / summary.delta_F if margin is not None and summary.delta_F > 0 else None
    advisory = usefulness_check(summary.n_eff, epsilon, r)
    payload = {
        "report": "analysis",
        "problem": config.name,
        "diameters": rpt.estimate_payload(est, config.name, seed),
        "bounds": rpt.summary_payload(summary),
        "usefulness": rpt.usefulness_payload(advisory),
        "certification": None,
        "validation": None,
    }
    exit_code = 0
    if margin is not None:
        report = certify(est, mean, margin, epsilon, direction,
                         problem=config.name, mean_source=mean_source)
        payload["certification"] = rpt.certification_payload(report)
        if report.recommendation == "NEITHER":
            exit_code = 1
    if args.run_validation:
        if samples < 100:
            raise ConfigError(
                f"validation needs at least 100 samples, got {samples}"
            )
        runs = []
        for source in ("absolute", "mcdiarmid"):
            runs.extend(_validation_runs(f, summary, source, direction,
                                         epsilon, samples, seed))
        payload["validation"] = rpt.validation_payload(
            runs, config.name, "absolute+mcdiarmid", seed)
        if payload["validation"]["verdict"] == "violated":
            exit_code = 1
    _emit(payload, args, sys.stdout)
    if args.fmt == "table":
        _print_estimate_table(est, payload["diameters"], sys.stdout)
        print(f"advice: {advisory.text}", file=sys.stdout)
        if payload["certification"] is not None:
            _print_certification_table(payload["certification"], sys.stdout)
        if payload["validation"] is not None:
            _print_validation_table(payload["validation"], sys.stdout)
    return exit_code


def build_parser() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", required=True, help="problem config (JSON)")
    parent.add_argument("--epsilon", type=float, default=None,
                        help="per-side target probability of failure "
                             f"(default {DEFAULT_EPSILON})")
    parent.add_argument("--direction", choices=DIRECTIONS, default=None,
                        help=f"deviation direction (default {DEFAULT_DIRECTION})")
    parent.add_argument("--method", default=None,
                        help="vertex | grid:R | multistart:S,I "
                             "(default: vertex for n <= 12, multistart:16,30 above)")
    parent.add_argument("--samples", type=int, default=None,
                        help=f"Monte Carlo sample count (default {DEFAULT_SAMPLES})")
    parent.add_argument("--seed", type=int, default=None,
                        help=f"RNG seed (default {DEFAULT_SEED})")
    parent.add_argument("--out", default=None,
                        help="write the structured report to this path")
    parent.add_argument("--format", dest="fmt", choices=("table", "structured"),
                        default="table", help="stdout format (default table)")
    parent.add_argument("--workers", type=int, default=None,
                        help="parallel workers for command-backed functions "
                             "(default: machine parallelism)")

    parser = argparse.ArgumentParser(
        prog="margincert",
        description="Estimate input diameters of a bounded black-box function, "
                    "compute concentration and absolute fluctuation bounds, and "
                    "decide which bound certifies a margin at a target "
                    "probability of failure.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diameters", parents=[parent],
                       help="estimate per-input diameters and the output range")
    p.set_defaults(handler=cmd_diameters)

    p = sub.add_parser("certify", parents=[parent],
                       help="certify a margin at the target epsilon")
    p.add_argument("--margin", type=float, default=None,
                   help="margin to certify (units of the response)")
    p.set_defaults(handler=cmd_certify)

    p = sub.add_parser("validate", parents=[parent],
                       help="empirically check a bound against sampled deviations")
    p.add_argument("--bound-source", choices=("absolute", "mcdiarmid"),
                   required=True, help="which bound to test")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("analyze", parents=[parent],
                       help="diameters + bounds + usefulness (+ optional "
                            "certification and validation) in one pass")
    p.add_argument("--margin", type=float, default=None,
                   help="also certify this margin")
    p.add_argument("--validate", dest="run_validation", action="store_true",
                   help="also run empirical validation of both bounds")
    p.set_defaults(handler=cmd_analyze)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own message; code 2 on usage
        return int(exc.code or 0)
    if args.workers is None:
        args.workers = os.cpu_count() or 1
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be a nonnegative integer", file=sys.stderr)
        return 2
    try:
        return args.handler(args)
    except (ConfigError, BudgetExceededError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (EvaluationError, InconsistentEstimateError) as err:
        print(f"evaluation failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
