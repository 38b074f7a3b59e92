"""Piecewise-continuous Volterra kernels.

A kernel on the triangle 0 <= s <= t <= T is made of ``n`` smooth segments
K_1..K_n living in the bands ``alpha_{i-1}(t) < s < alpha_i(t)``, with
``alpha_0 = 0`` and ``alpha_n(t) = t``.  Only the interior curves
alpha_1..alpha_{n-1} are stored.

Segment callables take ``(t, s)`` and must broadcast over numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError

ArrayFn2 = Callable[[np.ndarray, np.ndarray], np.ndarray]

_DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class BoundaryCurve:
    """A curve alpha(t) through the origin separating two kernel bands.

    Use :meth:`proportional` for alpha(t) = c*t, or :meth:`general` with an
    explicit derivative.
    """

    value_fn: Callable[[np.ndarray], np.ndarray]
    derivative_fn: Callable[[np.ndarray], np.ndarray]
    ratio: float | None = None

    @classmethod
    def proportional(cls, c: float) -> "BoundaryCurve":
        c = float(c)
        if not 0.0 < c < 1.0:
            raise ConfigurationError(f"proportional boundary ratio must lie in (0, 1), got {c}")
        return cls(
            value_fn=lambda t, c=c: c * np.asarray(t, dtype=float),
            derivative_fn=lambda t, c=c: np.full(np.shape(t), c, dtype=float),
            ratio=c,
        )

    @classmethod
    def general(cls, value, derivative) -> "BoundaryCurve":
        if derivative is None:
            raise ConfigurationError("general boundary curves need an explicit derivative")
        return cls(value_fn=value, derivative_fn=derivative)

    def __call__(self, t):
        return self.value_fn(t)

    def derivative(self, t):
        return self.derivative_fn(t)

    def to_dict(self) -> dict:
        if self.ratio is None:
            raise ConfigurationError("only proportional boundaries can be serialized")
        return {"proportional": self.ratio}


@dataclass(frozen=True)
class KernelSegment:
    func: ArrayFn2
    constant: float | None = None
    label: str = ""

    @classmethod
    def const(cls, c: float) -> "KernelSegment":
        c = float(c)
        return cls(func=lambda t, s, c=c: np.full(np.broadcast(t, s).shape, c), constant=c, label=f"{c!r}")

    def __call__(self, t, s):
        if self.constant is not None:
            return np.full(np.broadcast(t, s).shape, self.constant)
        return np.asarray(self.func(t, s), dtype=float) * np.ones(np.broadcast(t, s).shape)


@dataclass(frozen=True)
class Violation:
    invariant: str
    detail: str
    t: float | None = None

    def to_dict(self) -> dict:
        return {"invariant": self.invariant, "detail": self.detail, "t": self.t}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def invariants(self) -> set[str]:
        return {v.invariant for v in self.violations}

    def add(self, invariant: str, detail: str, t: float | None = None) -> None:
        self.violations.append(Violation(invariant, detail, None if t is None else float(t)))


@dataclass(frozen=True)
class PiecewiseKernel:
    segments: tuple[KernelSegment, ...]
    boundaries: tuple[BoundaryCurve, ...]
    horizon: float

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))
        if not self.segments:
            raise ConfigurationError("kernel needs at least one segment")
        if len(self.boundaries) != len(self.segments) - 1:
            raise ConfigurationError(
                f"{len(self.segments)} segments need {len(self.segments) - 1} boundary curves, "
                f"got {len(self.boundaries)}"
            )
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigurationError(f"horizon must be positive, got {self.horizon}")

    @property
    def n(self) -> int:
        return len(self.segments)

    def with_horizon(self, T: float) -> "PiecewiseKernel":
        return replace(self, horizon=float(T))

    def _check_t(self, t: float) -> None:
        if t < -_DOMAIN_SLACK * self.horizon or t > self.horizon * (1 + _DOMAIN_SLACK):
            raise DomainError(f"t={t} outside [0, {self.horizon}]")

    def segment_bounds(self, t: float) -> np.ndarray:
        """[0, alpha_1(t), ..., alpha_{n-1}(t), t]."""
        self._check_t(t)
        inner = [float(b(t)) for b in self.boundaries]
        return np.array([0.0, *inner, float(t)])

    def segment_index(self, t: float, s):
        """0-based segment index for points s at time t; a point on a curve goes left."""
        inner = np.array([float(b(t)) for b in self.boundaries])
        return np.searchsorted(inner, s, side="left")

    def eval(self, t: float, s: float) -> float:
        self._check_t(t)
        if s < -_DOMAIN_SLACK * self.horizon or s > t + _DOMAIN_SLACK * self.horizon:
            raise DomainError(f"need 0 <= s <= t, got t={t}, s={s}")
        i = int(self.segment_index(t, s))
        return float(self.segments[i](t, s))

    def values_on_segment(self, i: int, t, s) -> np.ndarray:
        return self.segments[i](t, s)

    def x0_denominator(self) -> float:
        """sum_i K_i(0,0) [alpha_i'(0) - alpha_{i-1}'(0)] with alpha_0' = 0, alpha_n' = 1."""
        slopes = [0.0, *(float(b.derivative(0.0)) for b in self.boundaries), 1.0]
        return float(
            sum(float(seg(0.0, 0.0)) * (slopes[i + 1] - slopes[i]) for i, seg in enumerate(self.segments))
        )

    def validate(self, samples: int = 1000) -> ValidationReport:
        if samples < 1:
            raise ConfigurationError("samples must be positive")
        report = ValidationReport()
        T = self.horizon
        ts = np.linspace(0.0, T, samples + 1)[1:]

        for i, b in enumerate(self.boundaries, start=1):
            a0 = float(b(0.0))
            if abs(a0) > 1e-12:
                report.add("boundary-origin", f"alpha_{i}(0) = {a0} != 0", 0.0)
            vals = np.array([float(b(t)) for t in ts])
            drops = np.nonzero(np.diff(vals) < -1e-12 * T)[0]
            if drops.size:
                j = drops[0] + 1
                report.add("boundary-monotone", f"alpha_{i} decreases before t={ts[j]}", ts[j])

        for t in ts:
            bounds = self.segment_bounds(t)
            gaps = np.diff(bounds)
            bad = np.nonzero(gaps <= 0)[0]
            if bad.size:
                j = int(bad[0])
                report.add(
                    "boundary-order",
                    f"bounds not strictly increasing at position {j} (alpha_{j}(t)={bounds[j]}, "
                    f"alpha_{j + 1}(t)={bounds[j + 1]})",
                    t,
                )
                break

        slopes = [float(b.derivative(0.0)) for b in self.boundaries]
        for i in range(len(slopes) - 1):
            if slopes[i] > slopes[i + 1]:
                report.add("slope-order", f"alpha_{i + 1}'(0)={slopes[i]} > alpha_{i + 2}'(0)={slopes[i + 1]}")
        if slopes and slopes[-1] >= 1.0:
            report.add("slope-bound", f"alpha_{len(slopes)}'(0)={slopes[-1]} is not < 1")

        kn = self.segments[-1](ts, ts)
        zero = np.nonzero(~np.isfinite(kn) | (kn == 0))[0]
        if zero.size:
            report.add("diagonal-nonzero", f"K_n(t,t) vanishes or is non-finite at t={ts[zero[0]]}", ts[zero[0]])

        for i, seg in enumerate(self.segments):
            lo = np.array([self.segment_bounds(t)[i] for t in ts])
            hi = np.array([self.segment_bounds(t)[i + 1] for t in ts])
            for frac in (0.0, 0.5, 1.0):
                vals = seg(ts, lo + frac * (hi - lo))
                bad = np.nonzero(~np.isfinite(vals))[0]
                if bad.size:
                    report.add("segment-finite", f"K_{i + 1} non-finite near t={ts[bad[0]]}", ts[bad[0]])
                    break

        den = self.x0_denominator()
        if not np.isfinite(den) or den == 0.0:
            report.add("x0-denominator", f"initial-value denominator is {den}")
        return report


def identity_kernel(T: float = 1.0) -> PiecewiseKernel:
    return PiecewiseKernel((KernelSegment.const(1.0),), (), float(T))


def voltker_kernel(T: float = 1.0) -> PiecewiseKernel:
    """Three-band storage efficiency kernel: 1 on (0, t/4), 0.9 on (t/4, 3t/4), 0.85 on (3t/4, t)."""
    return PiecewiseKernel(
        (KernelSegment.const(1.0), KernelSegment.const(0.9), KernelSegment.const(0.85)),
        (BoundaryCurve.proportional(0.25), BoundaryCurve.proportional(0.75)),
        float(T),
    )


def kernel_from_parts(
    values: Sequence[float | KernelSegment], ratios: Sequence[float], T: float
) -> PiecewiseKernel:
    segs = tuple(v if isinstance(v, KernelSegment) else KernelSegment.const(v) for v in values)
    return PiecewiseKernel(segs, tuple(BoundaryCurve.proportional(r) for r in ratios), float(T))
