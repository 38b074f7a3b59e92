"""Storage charge/discharge strategies for load leveling.

The storage must cover the imbalance between load and base generation.  The
cumulative energy imbalance

    f(t) = int_0^t (load - base)(tau) dtau        [MWh]

is the right-hand side of a first-kind Volterra equation whose kernel holds
the storage efficiency of energy by age band; the solution x(t) [MW] is the
dispatch (positive = discharge to the grid).  With an ideal kernel K = 1 the
strategy is the imbalance itself.

Storage energy and power limits are not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import ConfigurationError, NumericalError, VolterraError
from .kernel import PiecewiseKernel
from .linear import (
    DEFAULT_OPTIONS,
    CollocationSystem,
    RightHandSide,
    SolverOptions,
    collocation_system,
    solve,
)
from .mesh import Mesh
from .series import LoadSeries, parse_series, write_series


@dataclass(frozen=True)
class DispatchCase:
    load: LoadSeries
    base_generation: LoadSeries
    storage_kernel: PiecewiseKernel
    options: SolverOptions = DEFAULT_OPTIONS

    def __post_init__(self):
        if not self.load.same_grid(self.base_generation):
            raise ConfigurationError("load and base generation are on different time grids")

    @property
    def mesh(self) -> Mesh:
        return Mesh(self.load.times - self.load.times[0])

    @property
    def kernel(self) -> PiecewiseKernel:
        """Storage kernel on the normalized horizon [0, span]."""
        return self.storage_kernel.with_horizon(self.load.span)

    def with_load(self, load: LoadSeries) -> "DispatchCase":
        return DispatchCase(load, self.base_generation, self.storage_kernel, self.options)

    def with_options(self, options: SolverOptions) -> "DispatchCase":
        return DispatchCase(self.load, self.base_generation, self.storage_kernel, options)


@dataclass(frozen=True)
class DispatchStrategy:
    times: np.ndarray
    power: np.ndarray
    origin: object = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def as_series(self) -> LoadSeries:
        return LoadSeries(self.times, self.power, self.origin)


@dataclass(frozen=True)
class StrategyScore:
    rmse: float
    mae: float

    def to_dict(self) -> dict:
        return {"rmse": self.rmse, "mae": self.mae}


def build_rhs(case: DispatchCase) -> RightHandSide:
    """Cumulative trapezoid integral of (load - base) from the first sample, in MWh."""
    imbalance = case.load.values - case.base_generation.values
    f = cumulative_trapezoid(imbalance, case.mesh.nodes, initial=0.0)
    return RightHandSide.sampled(f)


def compute_strategy(case: DispatchCase, system: CollocationSystem | None = None) -> DispatchStrategy:
    mesh = case.mesh
    kernel = case.kernel
    try:
        sol = solve(kernel, build_rhs(case), mesh, case.options, system=system)
    except NumericalError as exc:
        exc.args = (f"dispatch solve (alpha={case.options.alpha}): {exc}",)
        raise
    return DispatchStrategy(case.load.times, sol.coefficients, case.load.origin, sol.warnings)


def _check_grid(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape or not np.allclose(a, b, rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(a))))):
        raise ConfigurationError("strategies are on different time grids")


def score_strategy(candidate: DispatchStrategy, benchmark: DispatchStrategy) -> StrategyScore:
    _check_grid(candidate.times, benchmark.times)
    d = candidate.power - benchmark.power
    return StrategyScore(rmse=float(np.sqrt(np.mean(d * d))), mae=float(np.mean(np.abs(d))))


def leveled_load(case: DispatchCase, strategy: DispatchStrategy) -> LoadSeries:
    """Net load seen by base generation once the storage dispatch is applied."""
    _check_grid(case.load.times, strategy.times)
    return case.load.with_values(case.load.values - strategy.power)


def benchmark_strategy(case: DispatchCase, actual_load: LoadSeries) -> DispatchStrategy:
    """Unregularized strategy computed from actual (not forecast) load."""
    return compute_strategy(DispatchCase(actual_load, case.base_generation, case.storage_kernel, SolverOptions(
        denominator_tolerance=case.options.denominator_tolerance, refine=case.options.refine)))


@dataclass(frozen=True)
class GridSearchResult:
    best_alpha: float
    scores: dict[float, StrategyScore]
    failures: dict[float, str]

    @property
    def best_score(self) -> StrategyScore:
        return self.scores[self.best_alpha]

    def to_dict(self) -> dict:
        return {
            "best_alpha": self.best_alpha,
            "scores": [{"alpha": a, **s.to_dict()} for a, s in sorted(self.scores.items())],
            "failures": [{"alpha": a, "error": e} for a, e in sorted(self.failures.items())],
        }


def alpha_grid_search(case: DispatchCase, benchmark: DispatchStrategy, alphas: Sequence[float]) -> GridSearchResult:
    """Score every alpha against the benchmark and keep the lowest RMSE (ties go to the smaller alpha)."""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ConfigurationError("alpha grid is empty")
    if any(not a >= 0 for a in alphas):
        raise ConfigurationError("alpha values must be nonnegative")
    # the collocation weights do not depend on alpha
    system = collocation_system(case.kernel, case.mesh, case.options.refine)
    scores: dict[float, StrategyScore] = {}
    failures: dict[float, str] = {}
    for a in sorted(set(alphas)):
        opts = SolverOptions(a, case.options.denominator_tolerance, case.options.refine, case.options.first_step)
        try:
            strat = compute_strategy(case.with_options(opts), system)
        except NumericalError as exc:
            failures[a] = str(exc)
            continue
        scores[a] = score_strategy(strat, benchmark)
    if not scores:
        raise SearchError("every alpha in the grid failed to solve")
    best = min(scores, key=lambda a: (scores[a].rmse, a))
    return GridSearchResult(best, scores, failures)


class SearchError(NumericalError):
    kind = "search"


def synthetic_week(seed: int = 0, hours: int = 168) -> tuple[LoadSeries, LoadSeries]:
    """Deterministic hourly (load, base generation) for a week with morning and evening peaks.

    Base generation is a flat block at the weekly mean load, so the storage
    has to absorb the whole daily swing.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(hours, dtype=float)
    hour = t % 24
    day = (t // 24).astype(int)
    weekend = (day % 7) >= 5
    morning = 900.0 * np.exp(-0.5 * ((hour - 9.0) / 2.0) ** 2)
    evening = 650.0 * np.exp(-0.5 * ((hour - 19.0) / 2.5) ** 2)
    night = -400.0 * np.exp(-0.5 * ((hour - 3.5) / 3.0) ** 2)
    level = 3000.0 - 350.0 * weekend
    load = level + (morning + evening) * np.where(weekend, 0.7, 1.0) + night
    load = load + rng.normal(0.0, 15.0, hours)
    base = np.full(hours, float(np.round(load.mean(), 1)))
    return LoadSeries(t, np.round(load, 1)), LoadSeries(t, base)


def noisy_forecast(actual: LoadSeries, relative_level: float, seed: int = 0) -> LoadSeries:
    """Actual load plus uniform noise on [-d, d], d = relative_level * peak load."""
    rng = np.random.default_rng(seed)
    d = relative_level * float(np.max(np.abs(actual.values)))
    return actual.with_values(actual.values + rng.uniform(-d, d, len(actual)))


WEEK_ORIGIN = datetime(2024, 1, 1)  # a Monday
WEEK_FILES = {"load": "week_load.csv", "base": "week_base.csv", "forecast": "week_forecast.csv"}
WEEK_FORECAST_LEVEL = 0.05


def generate_week_files(directory) -> dict[str, Path]:
    """Write the synthetic week (actual load, base, 5%-noise forecast) as CSVs."""
    load, base = synthetic_week(0)
    load = LoadSeries(load.times, load.values, WEEK_ORIGIN)
    base = LoadSeries(base.times, base.values, WEEK_ORIGIN)
    fc = noisy_forecast(load, WEEK_FORECAST_LEVEL, seed=0)
    fc = fc.with_values(np.round(fc.values, 1))
    out = {}
    for key, series in (("load", load), ("base", base), ("forecast", fc)):
        path = Path(directory) / WEEK_FILES[key]
        write_series(series, path)
        out[key] = path
    return out


def shipped_week() -> dict[str, LoadSeries]:
    """The synthetic week CSVs bundled with the package."""
    root = resources.files("volterra_leveling") / "data"
    return {k: parse_series((root / name).read_text(encoding="utf-8"), name) for k, name in WEEK_FILES.items()}
