import numpy as np
import pytest

from volterra_leveling import ConfigurationError, SolverOptions, identity_kernel, voltker_kernel
from volterra_leveling.dispatch import (
    DispatchCase,
    DispatchStrategy,
    alpha_grid_search,
    benchmark_strategy,
    build_rhs,
    compute_strategy,
    generate_week_files,
    leveled_load,
    noisy_forecast,
    score_strategy,
    shipped_week,
    synthetic_week,
)
from volterra_leveling.series import LoadSeries, read_series

HOURS = np.arange(169.0)


def series(values, times=HOURS):
    return LoadSeries(times, np.asarray(values, float))


def test_rhs_zero_imbalance():
    load = series(np.full(169, 500.0))
    f = build_rhs(DispatchCase(load, load, voltker_kernel())).values
    assert np.all(f == 0.0)


def test_rhs_constant_imbalance():
    case = DispatchCase(series(np.full(169, 600.0)), series(np.full(169, 500.0)), voltker_kernel())
    np.testing.assert_allclose(build_rhs(case).values, 100.0 * HOURS, rtol=1e-14)


def test_rhs_sinusoid_closed_form():
    d = 50 * np.sin(2 * np.pi * HOURS / 24)
    case = DispatchCase(series(1000 + d), series(np.full(169, 1000.0)), voltker_kernel())
    exact = 50 * 24 / (2 * np.pi) * (1 - np.cos(2 * np.pi * HOURS / 24))
    # composite trapezoid error bound: T h^2 max|d''| / 12
    bound = 168 * 1.0 * 50 * (2 * np.pi / 24) ** 2 / 12
    assert np.max(np.abs(build_rhs(case).values - exact)) <= bound


def test_grid_mismatch_rejected():
    with pytest.raises(ConfigurationError):
        DispatchCase(series(np.ones(169)), series(np.ones(168), np.arange(168.0)), voltker_kernel())


def test_identity_constant_imbalance():
    case = DispatchCase(series(np.full(169, 600.0)), series(np.full(169, 500.0)), identity_kernel())
    np.testing.assert_allclose(compute_strategy(case).power, 100.0, rtol=1e-12)


def test_voltker_constant_imbalance_inflated_at_start():
    case = DispatchCase(series(np.full(169, 600.0)), series(np.full(169, 500.0)), voltker_kernel())
    power = compute_strategy(case).power
    assert power[0] == pytest.approx(100.0 / 0.9125, rel=1e-12)


def test_zero_imbalance_is_exactly_zero():
    load, _ = synthetic_week()
    strat = compute_strategy(DispatchCase(load, load, voltker_kernel()))
    assert np.all(strat.power == 0.0)
    net = leveled_load(DispatchCase(load, load, voltker_kernel()), strat)
    assert net == load


def test_identity_kernel_reduces_to_imbalance():
    # the only error source is f'(0), which alternates in sign and is O(h^2)
    errs = []
    for step in (0.5, 0.25, 0.125):
        t = np.arange(0.0, 48.0 + step / 2, step)
        d = 80 * np.sin(2 * np.pi * t / 24) + 30 * np.cos(2 * np.pi * t / 12)
        case = DispatchCase(series(1000 + d, t), series(np.full(t.size, 1000.0), t), identity_kernel())
        errs.append(np.max(np.abs(compute_strategy(case).power - d)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)


def test_identity_kernel_net_equals_base():
    load, base = synthetic_week()
    case = DispatchCase(load, base, identity_kernel())
    net = leveled_load(case, compute_strategy(case))
    d = load.values - base.values
    bound = np.max(np.abs(np.diff(d, 2))) / 4 + 1e-9
    assert np.max(np.abs(net.values - base.values)) <= bound


def test_peak_shaving_variance():
    load, base = synthetic_week()
    case = DispatchCase(load, base, voltker_kernel())
    net = leveled_load(case, compute_strategy(case))
    assert np.var(net.values) < np.var(load.values)
    assert np.max(net.values) < np.max(load.values)


def test_score_examples():
    t = np.arange(5.0)
    a = DispatchStrategy(t, np.array([1.0, -2.0, 3.0, 0.0, 5.0]))
    assert score_strategy(a, a).rmse == 0.0 and score_strategy(a, a).mae == 0.0
    b = DispatchStrategy(t, a.power + 10.0)
    s = score_strategy(b, a)
    assert s.rmse == pytest.approx(10.0) and s.mae == pytest.approx(10.0)
    with pytest.raises(ConfigurationError):
        score_strategy(a, DispatchStrategy(t + 1, a.power))


def test_grid_single_alpha():
    load, base = synthetic_week()
    case = DispatchCase(load, base, voltker_kernel())
    res = alpha_grid_search(case, benchmark_strategy(case, load), [0.0])
    assert res.best_alpha == 0.0 and res.best_score.rmse == 0.0


def test_grid_clean_data_prefers_zero():
    load, base = synthetic_week()
    case = DispatchCase(load, base, voltker_kernel())
    res = alpha_grid_search(case, benchmark_strategy(case, load), [0.0, 0.1, 0.5, 1.0])
    assert res.best_alpha == 0.0


def test_grid_noisy_forecast_prefers_positive_alpha():
    load, base = synthetic_week()
    fc = noisy_forecast(load, 0.05, seed=0)
    case = DispatchCase(fc, base, voltker_kernel())
    res = alpha_grid_search(case, benchmark_strategy(case, load), [0.0, 0.05, 0.1, 0.2, 0.5, 1.0])
    assert res.best_alpha > 0
    assert res.best_score.rmse < res.scores[0.0].rmse


def test_grid_rejects_negative_and_empty():
    load, base = synthetic_week()
    case = DispatchCase(load, base, voltker_kernel())
    bench = benchmark_strategy(case, load)
    with pytest.raises(ConfigurationError):
        alpha_grid_search(case, bench, [])
    with pytest.raises(ConfigurationError):
        alpha_grid_search(case, bench, [0.1, -0.1])


def test_benchmark_ignores_alpha():
    load, base = synthetic_week()
    plain = DispatchCase(load, base, voltker_kernel())
    reg = plain.with_options(SolverOptions(alpha=0.5))
    np.testing.assert_array_equal(benchmark_strategy(reg, load).power, benchmark_strategy(plain, load).power)


def test_synthetic_week_is_deterministic():
    a, b = synthetic_week(3), synthetic_week(3)
    assert a[0] == b[0] and a[1] == b[1]
    assert len(a[0]) == 168


def test_shipped_week_matches_generator(tmp_path):
    shipped = shipped_week()
    for key, path in generate_week_files(tmp_path).items():
        assert read_series(path) == shipped[key]
