"""Kernel JSON files, solve-mode CSVs and deterministic JSON reports.

Kernel file::

    {"T": 168,
     "segments": [{"value": 1.0}, {"value": "const:0.9"}, {"value": "age_fade:0.85,0.1"}],
     "boundaries": [{"proportional": 0.25}, {"proportional": 0.75}]}

or ``{"preset": "voltker", "T": 168}``.  Segment value ids:

* a number or ``const:C`` -- constant efficiency C
* ``age_fade:E,R`` -- E * (1 - R * (t - s) / T), linear loss with storage age
* ``exp_fade:E,R`` -- E * exp(-R * (t - s) / T)
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ConfigurationError, FormatError
from .kernel import BoundaryCurve, KernelSegment, PiecewiseKernel, identity_kernel, voltker_kernel

PRESETS = {"voltker": voltker_kernel, "identity": identity_kernel}


def segment_from_id(value: Any, T: float) -> KernelSegment:
    if isinstance(value, bool):
        raise ConfigurationError(f"bad segment value {value!r}")
    if isinstance(value, (int, float)):
        return KernelSegment.const(float(value))
    if not isinstance(value, str):
        raise ConfigurationError(f"bad segment value {value!r}")
    key, _, arg = value.partition(":")
    try:
        args = [float(a) for a in arg.split(",")] if arg else []
    except ValueError:
        raise ConfigurationError(f"bad arguments in segment id {value!r}") from None
    if key == "const" and len(args) == 1:
        return KernelSegment.const(args[0])
    if key == "age_fade" and len(args) == 2:
        e, r = args
        return KernelSegment(lambda t, s: e * (1.0 - r * (np.asarray(t) - np.asarray(s)) / T), label=value)
    if key == "exp_fade" and len(args) == 2:
        e, r = args
        return KernelSegment(lambda t, s: e * np.exp(-r * (np.asarray(t) - np.asarray(s)) / T), label=value)
    raise ConfigurationError(f"unknown segment id {value!r}")


def kernel_from_dict(doc: dict) -> PiecewiseKernel:
    if not isinstance(doc, dict):
        raise ConfigurationError("kernel document must be a JSON object")
    if "preset" in doc:
        name = doc["preset"]
        if name not in PRESETS:
            raise ConfigurationError(f"unknown kernel preset {name!r}; choose from {sorted(PRESETS)}")
        return PRESETS[name](float(doc.get("T", 1.0)))
    try:
        T = float(doc["T"])
        segs = doc["segments"]
        bounds = doc.get("boundaries", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"kernel document is missing or has a bad field: {exc}") from None
    segments = []
    for i, s in enumerate(segs):
        if not isinstance(s, dict) or "value" not in s:
            raise ConfigurationError(f"segment {i} needs a 'value'")
        segments.append(segment_from_id(s["value"], T))
    curves = []
    for i, b in enumerate(bounds):
        if not isinstance(b, dict) or "proportional" not in b:
            raise ConfigurationError(f"boundary {i} needs a 'proportional' ratio")
        curves.append(BoundaryCurve.proportional(b["proportional"]))
    return PiecewiseKernel(tuple(segments), tuple(curves), T)


def load_kernel(path: str | Path) -> PiecewiseKernel:
    p = Path(path)
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise FormatError(f"cannot read {p}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"{p}: invalid JSON: {exc}") from None
    return kernel_from_dict(doc)


def kernel_to_dict(kernel: PiecewiseKernel) -> dict:
    segs = []
    for s in kernel.segments:
        if s.constant is not None:
            segs.append({"value": s.constant})
        elif s.label:
            segs.append({"value": s.label})
        else:
            raise ConfigurationError("kernel has a segment with no file representation")
    return {"T": kernel.horizon, "segments": segs, "boundaries": [b.to_dict() for b in kernel.boundaries]}


def read_two_columns(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Header plus two numeric columns (e.g. ``t,f``)."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {p}: {exc}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if len(rows) < 3:
        raise FormatError(f"{p}: expected a header and at least two data rows")
    a, b = [], []
    for row, r in enumerate(rows[1:], start=1):
        try:
            x, y = float(r[0]), float(r[1])
        except (ValueError, IndexError):
            raise FormatError(f"{p}: row {row}: expected two numbers", row=row) from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise FormatError(f"{p}: row {row}: non-finite value", row=row)
        a.append(x)
        b.append(y)
    return np.array(a), np.array(b)


def write_two_columns(path: str | Path, header: tuple[str, str], a, b) -> None:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for x, y in zip(a, b):
        w.writerow([repr(float(x)), repr(float(y))])
    Path(path).write_text(out.getvalue(), encoding="utf-8")


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def render_report(results: dict) -> str:
    """Sorted keys, fixed indentation, non-finite floats as null."""
    return json.dumps(_clean(results), sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit_report(results: dict, path: str | Path | None) -> str:
    text = render_report(results)
    if path is not None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise OSError(f"cannot write report {path}: {exc}") from exc
    return text
