"""Machine-readable reports.

A report is a JSON document with sorted keys, two-space indentation and every
float written with 17 significant digits (so it parses back bit-for-bit).
Non-finite floats are written as the strings "nan", "inf", "-inf". There is
no timestamp, so identical inputs give byte-identical output.

Top-level keys::

    tool, version, command, inputs, status, exit_code, message, result

``status`` is one of satisfied, violated, inconclusive, error. Every numeric
block inside ``result`` carries the tolerance it was judged against under the
key ``tolerance``; ``null`` there marks a measured quantity that was not
judged against any threshold (for example a trajectory's energy drift).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .adapted import AdaptedReport, ConditionReport, InfeasibilityCertificate, SearchResult
from .spectral import OneForm, ScalarField

__all__ = [
    "STATUSES",
    "EXIT_CODES",
    "Report",
    "emit_report",
    "parse_report",
    "dumps",
    "field_to_dict",
    "field_from_dict",
    "one_form_to_dict",
    "adapted_to_dict",
    "condition_to_dict",
    "certificate_to_dict",
    "search_to_dict",
]

STATUSES = ("satisfied", "violated", "inconclusive", "error")
EXIT_CODES = {"satisfied": 0, "violated": 1, "inconclusive": 3, "error": 1}


@dataclass
class Report:
    command: str
    status: str
    inputs: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    message: str = ""
    exit_code: int | None = None
    tool: str = "homwell"
    version: str = __version__

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.exit_code is None:
            self.exit_code = EXIT_CODES[self.status]

    def to_dict(self):
        return {
            "tool": self.tool,
            "version": self.version,
            "command": self.command,
            "inputs": self.inputs,
            "status": self.status,
            "exit_code": self.exit_code,
            "message": self.message,
            "result": self.result,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            command=d["command"],
            status=d["status"],
            inputs=d.get("inputs", {}),
            result=d.get("result", {}),
            message=d.get("message", ""),
            exit_code=d.get("exit_code"),
            tool=d.get("tool", "homwell"),
            version=d.get("version", __version__),
        )


def _num(x):
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    # keep floats recognizable as floats after parsing
    return text if any(ch in text for ch in ".en") else text + ".0"


def _encode(obj, level):
    pad = "  " * (level + 1)
    end = "  " * level
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(obj[k], level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_encode(v, level + 1) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _encode(obj, 0) + "\n"


def emit_report(r: Report, path=None) -> str:
    """Serialize ``r``; write to ``path`` if given. Returns the text."""
    text = dumps(r.to_dict())
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def parse_report(text: str) -> Report:
    return Report.from_dict(json.loads(text))


# -- converters -------------------------------------------------------------------------


def field_to_dict(g: ScalarField, drop_below: float = 0.0):
    """Records of ``g``; modes with modulus <= ``drop_below`` are omitted (0 keeps all but exact zeros)."""
    recs = [list(r) for r in g.to_records() if abs(complex(r[2], r[3])) > drop_below]
    return {"max_mode": g.max_mode, "modes": recs, "dropped_below": drop_below}


def field_from_dict(d):
    return ScalarField.from_records(d["modes"], d["max_mode"])


def one_form_to_dict(theta: OneForm, drop_below: float = 0.0):
    return {"dx": field_to_dict(theta.comp_dx, drop_below), "dy": field_to_dict(theta.comp_dy, drop_below)}


def adapted_to_dict(rep: AdaptedReport, include_primitive=True):
    d = {
        "weakly_adapted": rep.weakly_adapted,
        "strongly_adapted": rep.strongly_adapted,
        "geodesible_for_theta": rep.geodesible_for_theta,
        "strongly_geodesible_for_theta": rep.strongly_geodesible_for_theta,
        "pairing_min": rep.pairing_min,
        "pairing_lower_bound": rep.pairing_lower_bound,
        "closedness_residual": rep.closedness_residual,
        "period_residuals": list(rep.period_residuals),
        "contraction_residual": rep.contraction_residual,
        "lie_residual": rep.lie_residual,
        "unit_pairing_residual": rep.unit_pairing_residual,
        "grid_n": rep.grid_n,
        "tolerance": rep.tol,
    }
    if include_primitive:
        d["lagrangian_primitive"] = None if rep.lagrangian_primitive is None else field_to_dict(rep.lagrangian_primitive, 1e-15)
    return d


def certificate_to_dict(c: InfeasibilityCertificate | None):
    if c is None:
        return None
    return {
        "kind": c.kind,
        "y_witness": c.y_witness,
        "lower_bound": c.lower_bound,
        "explanation": c.explanation,
        "orbit_identity_residual": c.orbit_identity_residual,
        "tolerance": 0.0,  # the bound is a strict inequality against zero
    }


def condition_to_dict(rep: ConditionReport):
    return {
        "condition_id": rep.condition_id,
        "k": rep.k,
        "residual_inf_norm": rep.residual_inf_norm,
        "satisfied": rep.satisfied,
        "tolerance": rep.tol,
        "witness_available": rep.witness is not None,
        "open_question": rep.open_question,
        "certificate": certificate_to_dict(rep.certificate),
    }


def search_to_dict(res: SearchResult, tol):
    return {
        "search_status": res.status,
        "equality_residual": res.equality_residual,
        "pairing_min": res.pairing_min,
        "reason": res.reason,
        "theta": None if res.theta is None else one_form_to_dict(res.theta, 1e-15),
        "r": None if res.r is None else field_to_dict(res.r, 1e-15),
        "certificate": certificate_to_dict(res.certificate),
        "tolerance": tol,
    }
