"""Dataset ingestion, JSON test reports and their schema."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .models import SphericalSample
from .teststats import TestReport

__all__ = [
    "DataFileSpec",
    "load_dataset",
    "write_dataset",
    "SCHEMA_VERSION",
    "REPORT_SCHEMA",
    "report_to_dict",
]

SCHEMA_VERSION = "1.0"

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "axial uniformity test report",
    "type": "object",
    "required": ["schema_version", "test", "statistic", "p_value", "alpha", "reject",
                 "null_dist", "params"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "test": {"enum": ["specified_right", "specified_left", "specified_two_sided",
                          "bingham", "t_plus", "t_minus", "t_pm", "rayleigh"]},
        "statistic": {"type": "number"},
        "p_value": {"type": "number", "minimum": 0, "maximum": 1},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "reject": {"type": "boolean"},
        "null_dist": {
            "type": "object",
            "required": ["kind", "params"],
            "properties": {"kind": {"type": "string"}, "params": {"type": "object"}},
        },
        "params": {
            "type": "object",
            "required": ["p", "n"],
            "properties": {
                "p": {"type": "integer", "minimum": 2},
                "n": {"type": "integer", "minimum": 1},
                "theta": {"type": "array", "items": {"type": "number"}},
                "m": {"type": "integer"},
                "seed": {"type": "integer"},
            },
        },
    },
}


@dataclass(frozen=True)
class DataFileSpec:
    path: str
    delimiter: str = ","  # "," or "whitespace"
    has_header: bool = False
    renormalize: bool = False


def _split(line, delimiter):
    if delimiter == "whitespace":
        return line.split()
    return next(csv.reader([line], delimiter=delimiter))


def load_dataset(spec: DataFileSpec) -> SphericalSample:
    """Read one observation per row; lines starting with ``#`` are comments.

    Raises ``ValueError`` on empty files, ragged rows, non-numeric fields,
    zero vectors, or rows off the unit sphere (unless ``renormalize``).
    """
    if spec.delimiter not in (",", ";", "\t", "whitespace"):
        raise ValueError(f"unsupported delimiter {spec.delimiter!r}")
    rows = []
    header_skipped = not spec.has_header
    with open(spec.path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_skipped:
                header_skipped = True
                continue
            fields = _split(line, spec.delimiter)
            try:
                row = [float(v) for v in fields]
            except ValueError:
                raise ValueError(f"line {lineno}: non-numeric field") from None
            if rows and len(row) != len(rows[0]):
                raise ValueError(f"line {lineno}: expected {len(rows[0])} columns, got {len(row)}")
            rows.append(row)
    if not rows:
        raise ValueError("no observations")
    x = np.array(rows)
    if x.shape[1] < 2:
        raise ValueError("observations need at least 2 coordinates")
    if np.any(~np.isfinite(x)):
        raise ValueError("non-finite coordinate")
    if np.any(np.linalg.norm(x, axis=1) == 0):
        raise ValueError("zero vector in data")
    return SphericalSample.from_array(x, renormalize=spec.renormalize)


def write_dataset(sample: SphericalSample, path, delimiter=",", comment: str | None = None):
    """Write ``sample`` with round-trip float precision."""
    sep = " " if delimiter == "whitespace" else delimiter
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        for row in sample.points:
            fh.write(sep.join(repr(float(v)) for v in row) + "\n")


def _clean(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(u) for u in v]
    if isinstance(v, dict):
        return {k: _clean(u) for k, u in v.items()}
    return v


def report_to_dict(report: TestReport, **extra_params) -> dict:
    """JSON-ready dict following :data:`REPORT_SCHEMA`."""
    params = {**report.params, **extra_params}
    for key in ("p", "n", "m", "seed"):
        if key in params:
            params[key] = int(params[key])
    return _clean({
        "schema_version": SCHEMA_VERSION,
        "test": report.test_name,
        "statistic": report.statistic,
        "p_value": report.p_value,
        "alpha": report.alpha,
        "reject": report.reject,
        "null_dist": report.null_ref.describe(),
        "params": params,
    })


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)
