"""Seasonal-naive day-ahead load forecast and forecast error metrics.

This is a stand-in input port for the dispatch pipeline.  Any external model
can be used instead by passing its forecast as a ``timestamp,mw`` CSV; the
reference setup used 6 lagged loads plus day-of-week as features for random
forests (mtry=5, 150 trees), gradient boosting (200 trees, depth 10,
shrinkage 0.1, min 10 obs/node) and RBF-kernel SVR (sigma=0.4428387, C=128),
none of which are implemented here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .series import LoadSeries


@dataclass(frozen=True)
class ForecastRequest:
    history: LoadSeries
    horizon: int = 24
    period: int = 24

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("forecast horizon must be at least 1 step")
        if self.period < 1:
            raise ConfigurationError("seasonal period must be at least 1 step")
        if len(self.history) < self.period:
            raise ConfigurationError(
                f"history has {len(self.history)} points, need at least one period ({self.period})"
            )


def seasonal_naive(request: ForecastRequest) -> LoadSeries:
    """Repeat the last observed season: forecast(n+k) = history[n - P + (k-1) mod P]."""
    h = request.history
    n, P = len(h), request.period
    k = np.arange(1, request.horizon + 1)
    values = h.values[n - P + (k - 1) % P]
    times = h.times[-1] + k * h.step
    return LoadSeries(times, values, h.origin)


def forecast_metrics(forecast: LoadSeries, actual: LoadSeries) -> tuple[float, float]:
    """(MAE, RMSE) of forecast against actual on the same grid."""
    if not forecast.same_grid(actual):
        raise ConfigurationError("forecast and actual are on different time grids")
    e = forecast.values - actual.values
    return float(np.mean(np.abs(e))), float(np.sqrt(np.mean(e * e)))
