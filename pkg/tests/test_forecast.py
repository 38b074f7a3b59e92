import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from volterra_leveling import ConfigurationError
from volterra_leveling.forecast import ForecastRequest, forecast_metrics, seasonal_naive
from volterra_leveling.series import LoadSeries


def hourly(values, start=0.0):
    v = np.asarray(values, float)
    return LoadSeries(start + np.arange(v.size, dtype=float), v)


def test_periodic_history_exact():
    day = np.random.default_rng(1).uniform(500, 1500, 24)
    profile = np.tile(day, 9)
    hist = hourly(profile[: 24 * 7])
    fc = seasonal_naive(ForecastRequest(hist, horizon=48))
    actual = hourly(profile[24 * 7 :], start=24 * 7)
    assert forecast_metrics(fc, actual) == (0.0, 0.0)


def test_constant_history():
    fc = seasonal_naive(ForecastRequest(hourly(np.full(30, 7.5)), horizon=10))
    assert np.all(fc.values == 7.5)
    np.testing.assert_array_equal(fc.times, np.arange(30.0, 40.0))


def test_trend_gives_period_times_slope():
    m = 0.3
    t = np.arange(24 * 4, dtype=float)
    profile = 100 * np.sin(2 * np.pi * t / 24) + m * t
    fc = seasonal_naive(ForecastRequest(hourly(profile[:72]), horizon=24))
    mae, _ = forecast_metrics(fc, hourly(profile[72:], start=72))
    assert mae == pytest.approx(24 * m, rel=1e-12)


def test_metric_examples():
    a = hourly([1.0, 2.0, 3.0, 4.0])
    assert forecast_metrics(a, a) == (0.0, 0.0)
    assert forecast_metrics(a.with_values(a.values - 2.5), a) == pytest.approx((2.5, 2.5))
    alt = a.with_values(a.values + np.array([1.5, -1.5, 1.5, -1.5]))
    assert forecast_metrics(alt, a) == pytest.approx((1.5, 1.5))


def test_grid_mismatch():
    with pytest.raises(ConfigurationError):
        forecast_metrics(hourly([1.0, 2.0]), hourly([1.0, 2.0], start=1.0))


def test_request_validation():
    with pytest.raises(ConfigurationError):
        ForecastRequest(hourly(np.ones(10)), period=24)
    with pytest.raises(ConfigurationError):
        ForecastRequest(hourly(np.ones(30)), horizon=0)


@settings(max_examples=100)
@given(st.lists(st.floats(-1e4, 1e4), min_size=2, max_size=60), st.integers(0, 2**32 - 1))
def test_mae_never_exceeds_rmse(values, seed):
    actual = hourly(values)
    noise = np.random.default_rng(seed).normal(0, 100, len(values))
    mae, rmse = forecast_metrics(actual.with_values(actual.values + noise), actual)
    assert mae <= rmse * (1 + 1e-12)
