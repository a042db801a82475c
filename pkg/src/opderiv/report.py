"""Report serialization: deterministic JSON, curve CSVs and the ``opderiv/1`` schema.

Every float is written with 17 significant digits, so it round-trips exactly
and two runs with the same inputs give byte-identical files. Non-finite
floats become ``null``, and complex numbers become ``[re, im]`` pairs. CSVs
are comma-separated with a header row and LF line endings. They use Python's
own float formatting, so the decimal separator is always '.'.
"""

from __future__ import annotations

import csv
import json
import math
import platform
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema
import numpy as np

from . import SCHEMA, __version__

_NUM = {"type": ["number", "null"]}
_NUMS = {"type": "array", "items": _NUM}
_PAIR = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}

_VERDICT = {
    "type": "object",
    "required": ["verdict", "norm_estimate", "growth_exponent", "curve"],
    "properties": {
        "verdict": {"enum": ["Bounded", "Unbounded", "Inconclusive"]},
        "norm_estimate": _NUM,
        "growth_exponent": _NUM,
        "curve": {"type": "array", "items": _PAIR, "minItems": 1},
    },
}

_CONTINUITY = {
    "type": "object",
    "required": ["delta", "omega", "b_norm"],
    "properties": {"delta": _NUMS, "omega": _NUMS, "b_norm": _NUM},
}

_DIFF_REPORT = {
    "type": "object",
    "required": ["classification", "weak", "lipschitz", "continuity", "notes"],
    "properties": {
        "classification": {"enum": ["Strong", "WeakOnly", "NotWeak", "Inconclusive"]},
        "weak": _VERDICT,
        "lipschitz": {
            "type": "object",
            "required": ["t", "ratio", "sup_ratio", "limit_estimate", "valid_floor"],
            "properties": {"t": _NUMS, "ratio": _NUMS, "sup_ratio": _NUM,
                           "limit_estimate": _NUM, "valid_floor": _NUM},
        },
        "continuity": {"oneOf": [{"type": "null"}, _CONTINUITY]},
        "notes": {"type": "array", "items": {"type": "string"}},
        "chain": {
            "type": "object",
            "required": ["order", "verdicts", "term_norms"],
            "properties": {
                "order": {"type": "integer", "minimum": 1},
                "verdicts": {"type": "array", "items": _VERDICT},
                "term_norms": _NUMS,
            },
        },
    },
}

SCHEMA_DOC = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "opderiv/1",
    "type": "object",
    "required": ["schema", "command", "summary", "config"],
    "properties": {
        "schema": {"const": SCHEMA},
        "command": {"enum": ["analyze", "torus-demo", "sweep"]},
        "summary": {
            "type": "object",
            "required": ["classification", "wd_norm", "lipschitz"],
            "properties": {
                "classification": {"enum": ["Strong", "WeakOnly", "NotWeak", "Inconclusive"]},
                "wd_norm": _NUM,
                "lipschitz": _NUM,
            },
        },
        "report": _DIFF_REPORT,
        "config": {"type": "object"},
        "model": {"type": "object"},
        "function": {"type": "object"},
        "identity_check": _NUM,
        "operator_continuity": _CONTINUITY,
        "bandlimits": {"type": "array", "items": {"type": "integer"}},
        "runs": {"type": "array", "items": {"type": "object"}},
        "metadata": {
            "type": "object",
            "properties": {
                "versions": {"type": "object", "additionalProperties": {"type": "string"}},
                "wall_time_s": _NUM,
            },
        },
    },
}


def validate(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``doc`` conforms to ``opderiv/1``."""
    jsonschema.validate(doc, SCHEMA_DOC, cls=jsonschema.Draft202012Validator)


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    # keep floats recognizable as floats after a round trip
    if not any(ch in s for ch in ".eE"):
        s += ".0"
    return s


def _encode(obj: Any, out: List[str]) -> None:
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append(f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]")
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k), ensure_ascii=False))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Serialize to JSON with 17-significant-digit floats and ``null`` for non-finite values."""
    out: List[str] = []
    _encode(obj, out)
    return "".join(out) + "\n"


def plain(obj: Any) -> Any:
    """``dumps`` then ``json.loads``: the structure as a reader of the file sees it."""
    return json.loads(dumps(obj))


def write_json(path: Path, doc: dict) -> None:
    validate(plain(doc))
    Path(path).write_text(dumps(doc), encoding="utf-8")


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write a CSV with a header row; returns the number of data rows."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_csv_cell(v) for v in row])
            n += 1
    return n


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return "" if not math.isfinite(v) else format(float(v), ".17g")
    return v


def versions() -> Dict[str, str]:
    out = {"opderiv": __version__, "python": platform.python_version()}
    for dist in ("numpy", "scipy", "jsonschema"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = "unknown"
    return out


def summary(report) -> dict:
    return {
        "classification": report.classification.value,
        "wd_norm": report.wd_norm,
        "lipschitz": report.lipschitz.sup_ratio,
    }


def summary_line(report) -> str:
    """``<classification> | ‖wD(a)‖≈<x> | Lip≈<y>``; ``∞`` when wD(a) is unbounded."""
    wd = "∞" if report.wd_norm is None else f"{report.wd_norm:.6g}"
    return f"{report.classification.value} | ‖wD(a)‖≈{wd} | Lip≈{report.lipschitz.sup_ratio:.6g}"


def write_bundle(out_dir: Path, doc: dict, report, coefficients: Optional[dict] = None,
                 operator_continuity=None) -> Dict[str, int]:
    """Write ``report.json`` and the curve CSVs of one analysis.

    Returns the data-row count of each CSV written. Each count equals the
    length of the grid it records.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / "report.json", doc)
    rows = {}
    rows["weak_curve.csv"] = write_csv(out_dir / "weak_curve.csv", ["window", "norm"],
                                       report.weak_verdict.curve)
    lip = report.lipschitz
    rows["lipschitz.csv"] = write_csv(out_dir / "lipschitz.csv", ["t", "ratio"],
                                      zip(lip.t_grid, lip.ratios))
    cont = report.continuity
    rows["continuity.csv"] = write_csv(out_dir / "continuity.csv", ["delta", "omega"],
                                       [] if cont is None else zip(cont.delta_grid, cont.omega))
    if operator_continuity is not None:
        rows["operator_continuity.csv"] = write_csv(
            out_dir / "operator_continuity.csv", ["delta", "omega"],
            zip(operator_continuity.delta_grid, operator_continuity.omega))
    if coefficients is not None:
        rows["coefficients.csv"] = write_csv(
            out_dir / "coefficients.csv", ["n", "re", "im"],
            ((n, float(c.real), float(c.imag)) for n, c in sorted(coefficients.items())))
    return rows
