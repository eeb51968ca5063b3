"""JSON/text rendering of exact results (rationals as "p/q" plus a decimal)."""

from __future__ import annotations

import enum
import json
from fractions import Fraction
from typing import Any

from .bounds import BoundReport, Check
from .exact import MomentReport, SurvivalCurve
from .montecarlo import MCEstimate


def rat(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def dec(x) -> float:
    return float(f"{float(x):.12g}")


def parse_rat(s: str) -> Fraction:
    return Fraction(s)


def jsonable(obj: Any) -> Any:
    if isinstance(obj, Fraction):
        return rat(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    return obj


def survival_json(curve: SurvivalCurve) -> dict:
    return {"survival": [rat(v) for v in curve.values],
            "survival_decimal": [dec(v) for v in curve.values]}


def moments_json(m: MomentReport) -> dict:
    out = {"n": m.n, "m": m.m}
    for key in ("mean", "variance", "fourth_moment", "fourth_central"):
        out[key] = rat(getattr(m, key))
        out[key + "_decimal"] = dec(getattr(m, key))
    out["distribution"] = [rat(p) for p in m.distribution]
    out["p_zero"] = rat(m.p_zero)
    return out


def check_json(c: Check) -> dict:
    return {"label": c.label, "relation": c.relation, "lhs": rat(c.lhs), "rhs": rat(c.rhs),
            "margin": rat(c.margin), "margin_decimal": dec(c.margin), "ok": c.ok}


def report_json(r: BoundReport) -> dict:
    return {
        "name": r.name,
        "hypotheses_hold": r.hypotheses_hold,
        "lhs": rat(r.lhs), "rhs": rat(r.rhs), "margin": rat(r.margin),
        "lhs_decimal": dec(r.lhs), "rhs_decimal": dec(r.rhs), "margin_decimal": dec(r.margin),
        "pass": r.passed,
        "context": jsonable(r.context),
        "checks": [check_json(c) for c in r.checks],
    }


def estimate_json(e: MCEstimate) -> dict:
    return e.as_dict()


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def load_schema(name: str) -> dict:
    """Shipped JSON schema for a CLI output, e.g. ``eval`` or ``scan_aw``."""
    from importlib import resources

    return json.loads(resources.files("rdvlab").joinpath("schemas", f"{name}.schema.json").read_text())
