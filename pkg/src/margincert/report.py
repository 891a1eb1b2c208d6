"""Deterministic structured reports: serialization and validation.

Reports are plain JSON built from objects, arrays, numbers and strings.
Numbers are serialized with 17 significant digits so every float
round-trips exactly, and the output contains nothing run-dependent
beyond the inputs, so the same config, seed and flags produce a
byte-identical report.  Undefined quantities (n_eff of a constant
response, the confidence ratio when the range is zero) serialize as
null.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .bounds import BoundsSummary
from .certify import CertificationReport, UsefulnessAdvisory
from .diameter import DiameterEstimate
from .errors import ConfigError
from .montecarlo import ValidationResult

__all__ = [
    "dumps", "loads", "validate_report",
    "estimate_payload", "summary_payload", "certification_payload",
    "validation_payload", "usefulness_payload",
]


def _scalar(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            return "null"
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _emit(value: Any, indent: int, out: list[str]) -> None:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(value, dict):
        if not value:
            out.append("{}")
            return
        out.append("{\n")
        for i, (key, item) in enumerate(value.items()):
            out.append(f"{inner}{json.dumps(str(key))}: ")
            _emit(item, indent + 1, out)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{pad}}}")
    elif isinstance(value, (list, tuple)):
        if not value:
            out.append("[]")
            return
        out.append("[\n")
        for i, item in enumerate(value):
            out.append(inner)
            _emit(item, indent + 1, out)
            out.append(",\n" if i < len(value) - 1 else "\n")
        out.append(f"{pad}]")
    else:
        out.append(_scalar(value))


def dumps(payload: dict) -> str:
    """Serialize a report payload to deterministic JSON text."""
    out: list[str] = []
    _emit(payload, 0, out)
    out.append("\n")
    return "".join(out)


def loads(text: str) -> dict:
    """Parse report text back into a payload."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"report is not valid JSON: {err}")
    if not isinstance(payload, dict):
        raise ConfigError("report must be a JSON object")
    return payload


def estimate_payload(est: DiameterEstimate, problem: str, seed: int) -> dict:
    domain = est.domain
    return {
        "report": "diameters",
        "problem": problem,
        "method": est.method,
        "seed": seed,
        "inputs": [
            {"name": s.name, "min": s.lo, "max": s.hi} for s in domain.inputs
        ],
        "diameters": list(est.D),
        "system_diameter": _system_diameter(est.D),
        "n_eff": _neff_or_none(est.D),
        "f_squared": _f_squared(est.D),
        "F_min": est.F_min,
        "F_max": est.F_max,
        "delta_F": est.delta_F,
        "witnesses": {
            "per_input": [
                {"a": list(w.a), "b": list(w.b), "value": w.value}
                for w in est.witnesses
            ],
            "min_point": list(est.min_witness),
            "max_point": list(est.max_witness),
        },
        "exactness": est.exactness,
        "unreliable": est.unreliable,
        "failed_evals": est.failed_evals,
        "budget_used": est.budget_used,
    }


def _system_diameter(D) -> float:
    return math.sqrt(math.fsum(d * d for d in D))


def _neff_or_none(D) -> float | None:
    squares = math.fsum(d * d for d in D)
    if squares == 0.0:
        return None
    total = math.fsum(D)
    return total * total / squares


def _f_squared(D) -> list[float]:
    total = math.fsum(D)
    if total == 0.0:
        return [0.0] * len(D)
    return [(d / total) ** 2 for d in D]


def summary_payload(summary: BoundsSummary) -> dict:
    return {
        "diameters": list(summary.D),
        "system_diameter": summary.D_F,
        "fractions": list(summary.f),
        "f_max": summary.f_max,
        "n_eff": summary.n_eff,
        "F_min": summary.F_min,
        "F_max": summary.F_max,
        "delta_F": summary.delta_F,
        "mean": summary.mean,
        "mean_source": summary.mean_source,
        "r_plus": summary.r_plus,
        "r_minus": summary.r_minus,
        "epsilon": summary.epsilon,
        "mcdiarmid_bound": summary.mcd_bound,
        "theorem_lower_bound": summary.theorem_lb,
        "required_neff": summary.neff_required,
        "abs_plus": summary.abs_plus,
        "abs_minus": summary.abs_minus,
    }


def certification_payload(rep: CertificationReport) -> dict:
    return {
        "report": "certification",
        "problem": rep.problem,
        "direction": rep.direction,
        "margin": rep.margin,
        "epsilon": rep.epsilon,
        "summary": summary_payload(rep.summary),
        "design_point": rep.design_point,
        "uncertainty": rep.uncertainty,
        "confidence_ratio": rep.confidence_ratio,
        "required_margin_absolute": rep.required_margin_absolute,
        "required_margin_mcdiarmid": rep.required_margin_mcdiarmid,
        "verdict_absolute": rep.verdict_absolute,
        "verdict_mcdiarmid": rep.verdict_mcdiarmid,
        "recommendation": rep.recommendation,
        "claimed_pof": rep.claimed_pof,
        "caveats": list(rep.caveats),
    }


def validation_payload(results: list[ValidationResult], problem: str,
                       bound_source: str, seed: int) -> dict:
    return {
        "report": "validation",
        "problem": problem,
        "bound_source": bound_source,
        "seed": seed,
        "results": [
            {
                "direction": r.direction,
                "bound": r.bound_tested,
                "epsilon": r.epsilon,
                "samples": r.samples,
                "mean_hat": r.mean_hat,
                "se_mean": r.se_mean,
                "exceed_count": r.exceed_count,
                "exceed_frac": r.exceed_frac,
                "binomial_slack": r.binomial_slack,
                "failures": r.failures,
                "verdict": r.verdict,
            }
            for r in results
        ],
        "verdict": "violated" if any(r.verdict == "violated" for r in results)
        else "consistent",
    }


def usefulness_payload(adv: UsefulnessAdvisory) -> dict:
    return {
        "n_eff": adv.n_eff,
        "epsilon": adv.epsilon,
        "required_neff": adv.neff_required,
        "useful": adv.useful,
        "margin_fraction": adv.r,
        "required_neff_at_fraction": adv.neff_required_at_r,
        "useful_at_fraction": adv.useful_at_r,
        "advice": adv.text,
    }


_REQUIRED_KEYS = {
    "diameters": (
        "problem", "method", "inputs", "diameters", "system_diameter",
        "n_eff", "f_squared", "F_min", "F_max", "delta_F", "witnesses",
        "exactness", "budget_used",
    ),
    "certification": (
        "problem", "direction", "margin", "epsilon", "summary",
        "design_point", "uncertainty", "confidence_ratio",
        "verdict_absolute", "verdict_mcdiarmid", "recommendation",
        "claimed_pof", "caveats",
    ),
    "validation": ("problem", "bound_source", "results", "verdict"),
    "analysis": ("problem", "diameters", "usefulness"),
}

_SUMMARY_KEYS = (
    "diameters", "system_diameter", "fractions", "f_max", "n_eff",
    "F_min", "F_max", "delta_F", "mean", "r_plus", "r_minus", "epsilon",
    "mcdiarmid_bound", "theorem_lower_bound", "required_neff",
    "abs_plus", "abs_minus",
)


def validate_report(payload: dict) -> None:
    """Check a parsed report payload for the keys its kind requires."""
    kind = payload.get("report")
    if kind not in _REQUIRED_KEYS:
        raise ConfigError(f"unknown report kind {kind!r}")
    missing = [k for k in _REQUIRED_KEYS[kind] if k not in payload]
    if missing:
        raise ConfigError(f"{kind} report is missing keys: {missing}")
    if kind == "certification":
        summary = payload["summary"]
        if not isinstance(summary, dict):
            raise ConfigError("certification summary must be an object")
        lost = [k for k in _SUMMARY_KEYS if k not in summary]
        if lost:
            raise ConfigError(f"certification summary is missing keys: {lost}")
    if kind == "analysis":
        validate_report(payload["diameters"])
        if "certification" in payload and payload["certification"] is not None:
            validate_report(payload["certification"])
        if "validation" in payload and payload["validation"] is not None:
            validate_report(payload["validation"])
