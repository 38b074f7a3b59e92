"""Uniform-step power time series and their CSV form (``timestamp,mw``)."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, FormatError

STEP_RTOL = 1e-9


@dataclass(frozen=True)
class LoadSeries:
    """Values on a uniform grid of times in hours.

    ``origin`` is the wall-clock time of hour 0 when the series came from
    ISO-8601 timestamps; plain hour-index series leave it ``None``.
    """

    times: np.ndarray
    values: np.ndarray
    origin: datetime | None = None

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise ConfigurationError("times and values must be 1-d arrays of equal length")
        if t.size < 2:
            raise ConfigurationError("a series needs at least two points")
        dt = np.diff(t)
        if np.any(dt <= 0):
            raise ConfigurationError("timestamps must be strictly increasing")
        if not np.allclose(dt, dt[0], rtol=STEP_RTOL, atol=0.0):
            raise ConfigurationError("timestamps must have a uniform step")
        if not np.all(np.isfinite(v)):
            raise ConfigurationError("series values must be finite")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.times.size

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def span(self) -> float:
        return float(self.times[-1] - self.times[0])

    def with_values(self, values) -> "LoadSeries":
        return LoadSeries(self.times, values, self.origin)

    def same_grid(self, other: "LoadSeries") -> bool:
        """True when both series sample the same instants (wall-clock when both have origins)."""
        if self.times.shape != other.times.shape:
            return False
        shift = 0.0
        if self.origin is not None and other.origin is not None:
            try:
                shift = (other.origin - self.origin) / timedelta(hours=1)
            except TypeError:
                return False
        return bool(np.allclose(self.times, other.times + shift, rtol=0.0, atol=1e-9 * max(1.0, abs(self.step))))

    def __eq__(self, other):
        return (
            isinstance(other, LoadSeries)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.values, other.values)
            and self.origin == other.origin
        )


def _parse_time(text: str) -> float | datetime:
    try:
        return float(text)
    except ValueError:
        return datetime.fromisoformat(text)


def parse_series(text: str, source: str = "<string>") -> LoadSeries:
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise FormatError(f"{source}: expected a header and at least two data rows")
    header = [c.strip().lower() for c in rows[0]]
    if len(header) < 2:
        raise FormatError(f"{source}: header needs two columns", row=0)
    raw_t, vals = [], []
    # rows are numbered from 1 after the header
    for row, r in enumerate(rows[1:], start=1):
        if len(r) < 2:
            raise FormatError(f"{source}: row {row} has fewer than two columns", row=row)
        try:
            raw_t.append(_parse_time(r[0].strip()))
            v = float(r[1])
        except ValueError as exc:
            raise FormatError(f"{source}: row {row}: {exc}", row=row) from None
        if not math.isfinite(v):
            raise FormatError(f"{source}: row {row}: non-finite value {r[1]!r}", row=row)
        vals.append(v)
    if len(raw_t) < 2:
        raise FormatError(f"{source}: need at least two data rows")

    kinds = {isinstance(x, datetime) for x in raw_t}
    if len(kinds) > 1:
        raise FormatError(f"{source}: mixed timestamp formats")
    origin = None
    if True in kinds:
        origin = raw_t[0]
        try:
            hours = [(x - origin) / timedelta(hours=1) for x in raw_t]
        except TypeError:
            raise FormatError(f"{source}: mixed naive and timezone-aware timestamps") from None
    else:
        hours = raw_t
    t = np.array(hours, dtype=float)
    step = t[1] - t[0]
    if not step > 0:
        raise FormatError(f"{source}: row 2: timestamps must increase", row=2)
    for i in range(1, t.size):
        if not math.isclose(t[i] - t[i - 1], step, rel_tol=STEP_RTOL, abs_tol=0.0):
            raise FormatError(f"{source}: row {i + 1}: step {t[i] - t[i - 1]} differs from {step}", row=i + 1)
    return LoadSeries(t, np.array(vals), origin)


def read_series(path: str | Path) -> LoadSeries:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {p}: {exc}") from None
    if not text.strip():
        raise FormatError(f"{p}: file is empty")
    return parse_series(text, str(p))


def format_series(series: LoadSeries, header: tuple[str, str] = ("timestamp", "mw")) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for t, v in zip(series.times, series.values):
        if series.origin is not None:
            stamp = (series.origin + timedelta(hours=float(t))).isoformat()
        else:
            stamp = repr(float(t))
        w.writerow([stamp, repr(float(v))])
    return out.getvalue()


def write_series(series: LoadSeries, path: str | Path, header: tuple[str, str] = ("timestamp", "mw")) -> None:
    Path(path).write_text(format_series(series, header), encoding="utf-8")
