"""Command-line interface.

Exit codes: 0 success, 2 configuration or format error, 3 numerical failure.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from .dispatch import (
    DispatchCase,
    alpha_grid_search,
    benchmark_strategy,
    compute_strategy,
    leveled_load,
    score_strategy,
)
from .errors import ConfigurationError, NumericalError, VolterraError
from .files import emit_report, load_kernel, read_two_columns, write_two_columns
from .forecast import ForecastRequest, forecast_metrics, seasonal_naive
from .kernel import voltker_kernel
from .linear import PiecewiseLinearSolution, RightHandSide, SolverOptions, residuals, solve
from .mesh import Mesh, uniform_mesh
from .nonlinear import (
    NonlinearProblem,
    builtin_nonlinearity,
    kantorovich_diagnostics,
)
from .nonlinear import residual as nonlinear_residual
from .nonlinear import solve as solve_nonlinear
from .errors import DiagnosticUnavailableError
from .series import read_series, write_series
from .studies import MANUFACTURED, get_case, noisy_errors, run_convergence

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _echo(ctx: click.Context, msg: str) -> None:
    if not ctx.obj.get("quiet"):
        click.echo(msg)


def guarded(command: str):
    """Map library errors to exit codes and write the failure into ``--report`` when given."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            report = kwargs.get("report")
            try:
                return fn(*args, **kwargs)
            except VolterraError as exc:
                code = EXIT_NUMERICAL if isinstance(exc, NumericalError) else EXIT_CONFIG
                if report:
                    try:
                        emit_report({"command": command, "status": "failed", "error": exc.to_dict()}, report)
                    except OSError:
                        pass
                click.echo(f"error ({exc.kind}): {exc}", err=True)
                sys.exit(code)
            except OSError as exc:
                click.echo(f"error (io): {exc}", err=True)
                sys.exit(EXIT_CONFIG)

        return wrapper

    return deco


@click.group()
@click.version_option(__version__)
@click.option("--quiet", is_flag=True, help="Suppress the stdout summary.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True, help="Seed for noise injection.")
@click.pass_context
def main(ctx: click.Context, quiet: bool, seed: int) -> None:
    """Volterra-equation storage dispatch and solver tools."""
    ctx.ensure_object(dict)
    ctx.obj["quiet"] = quiet
    ctx.obj["seed"] = seed


def _rhs_on_mesh(kernel, rhs_path: str, n: int | None, fprime0: float | None = None):
    t, f = read_two_columns(rhs_path)
    T = kernel.horizon
    if t[0] != 0.0:
        raise ConfigurationError(f"right-hand side must start at t=0, starts at {t[0]}")
    if abs(t[-1] - T) > 1e-9 * T:
        raise ConfigurationError(f"right-hand side ends at t={t[-1]} but the kernel horizon is {T}")
    if n is None:
        t = t.copy()
        t[-1] = T
        mesh = Mesh(t)
        return mesh, RightHandSide.sampled(f, fprime0)
    mesh = uniform_mesh(T, n)
    if np.any(np.diff(t) <= 0):
        raise ConfigurationError("right-hand side times must be strictly increasing")
    if t.size < 4:
        return mesh, RightHandSide.sampled(np.interp(mesh.nodes, t, f), fprime0)
    # linear interpolation would bias f'(0), which fixes the first coefficient
    spline = CubicSpline(t, f)
    values = spline(mesh.nodes)
    values[0] = f[0]
    return mesh, RightHandSide.sampled(values, float(spline(0.0, 1)) if fprime0 is None else fprime0)


@main.command("solve")
@click.option("--kernel", "kernel_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--rhs", "rhs_path", required=True, type=click.Path(exists=True, dir_okay=False), help="CSV t,f.")
@click.option("--n", "n", type=click.IntRange(min=1), default=None, help="Uniform mesh intervals (default: the CSV grid).")
@click.option("--alpha", type=click.FloatRange(min=0.0), default=0.0, show_default=True)
@click.option("--fprime0", type=float, default=None, help="Exact f'(0), if known (default: estimated from the samples).")
@click.option("--refine", type=click.IntRange(min=1), default=None, help="Midpoint subcells per quadrature cell.")
@click.option("--first-step", type=click.Choice(["collocation", "midpoint"]), default="collocation", show_default=True)
@click.option("--nonlinear", is_flag=True, help="Solve int K G(s, x) ds = f by modified Newton-Kantorovich.")
@click.option("--g", "g_name", default=None, help="Built-in nonlinearity: linear, cube, power:P, tanh:C, saturating:C.")
@click.option("--x-init", "x_init_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Initial guess CSV t,x (default: linearization about x = 0).")
@click.option("--tol", type=float, default=1e-8, show_default=True)
@click.option("--max-iter", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV t,x.")
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@guarded("solve")
def solve_cmd(ctx, kernel_path, rhs_path, n, alpha, fprime0, refine, first_step, nonlinear, g_name, x_init_path, tol, max_iter, out, report):
    """Solve a first-kind Volterra equation with a piecewise kernel."""
    kernel = load_kernel(kernel_path)
    validation = kernel.validate()
    mesh, rhs = _rhs_on_mesh(kernel, rhs_path, n, fprime0)
    results: dict = {
        "command": "solve",
        "status": "ok",
        "N": mesh.N,
        "T": mesh.T,
        "alpha": alpha,
        "validation": [v.to_dict() for v in validation.violations],
    }
    if nonlinear:
        if g_name is None:
            raise ConfigurationError("--nonlinear needs --g")
        g, gx = builtin_nonlinearity(g_name)
        problem = NonlinearProblem.uniform(kernel, g, rhs, gx)
        opts = SolverOptions(alpha=alpha, refine=refine or 4, first_step=first_step)
        x_init = None
        if x_init_path:
            ti, xi = read_two_columns(x_init_path)
            x_init = PiecewiseLinearSolution(mesh, np.interp(mesh.nodes, ti, xi))
        res = solve_nonlinear(problem, mesh, x_init, tolerance=tol, max_iterations=max_iter, options=opts)
        sol = res.solution
        res_vals = np.array([nonlinear_residual(problem, sol, t, opts.refine) for t in mesh.nodes])
        results["mode"] = "nonlinear"
        results["nonlinearity"] = g_name
        results["trace"] = res.trace.to_dict()
        try:
            results["diagnostics"] = kantorovich_diagnostics(res.trace).to_dict()
        except DiagnosticUnavailableError as exc:
            results["diagnostics"] = {"unavailable": str(exc)}
    else:
        opts = SolverOptions(alpha=alpha, refine=refine or 1, first_step=first_step)
        sol = solve(kernel, rhs, mesh, opts)
        res_vals = residuals(kernel, sol, rhs, opts.refine)
        results["mode"] = "linear"
    results["x0"] = float(sol.coefficients[0])
    results["residual_max"] = float(np.max(np.abs(res_vals)))
    results["residual_rms"] = float(np.sqrt(np.mean(res_vals**2)))
    results["warnings"] = list(sol.warnings)
    if out:
        write_two_columns(out, ("t", "x"), mesh.nodes, sol.coefficients)
    emit_report(results, report)
    _echo(ctx, f"solved N={mesh.N} ({results['mode']}), max residual {results['residual_max']:.3e}")


def _parse_alpha(text: str) -> tuple[list[float], bool]:
    grid = text.startswith("grid:")
    body = text[5:] if grid else text
    try:
        vals = [float(v) for v in body.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"bad --alpha value {text!r}") from None
    if not vals or any(not v >= 0 for v in vals):
        raise ConfigurationError(f"--alpha needs nonnegative numbers, got {text!r}")
    if not grid and len(vals) != 1:
        raise ConfigurationError("use grid:a1,a2,... for several alpha values")
    return vals, grid


@main.command("dispatch")
@click.option("--load", "load_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Load (forecast or actual) CSV timestamp,mw.")
@click.option("--base", "base_path", required=True, type=click.Path(exists=True, dir_okay=False), help="Base generation CSV.")
@click.option("--kernel", "kernel_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Storage kernel JSON (default: three-band efficiency kernel).")
@click.option("--alpha", "alpha_text", default="0", show_default=True, help="A value, or grid:a1,a2,... (needs --benchmark-load).")
@click.option("--benchmark-load", "bench_path", default=None, type=click.Path(exists=True, dir_okay=False), help="Actual load for the benchmark strategy.")
@click.option("--out-strategy", type=click.Path(dir_okay=False), default=None)
@click.option("--out-net", type=click.Path(dir_okay=False), default=None)
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@guarded("dispatch")
def dispatch_cmd(ctx, load_path, base_path, kernel_path, alpha_text, bench_path, out_strategy, out_net, report):
    """Compute a storage charge/discharge strategy from load and base generation."""
    load = read_series(load_path)
    base = read_series(base_path)
    kernel = load_kernel(kernel_path) if kernel_path else voltker_kernel()
    alphas, grid = _parse_alpha(alpha_text)
    case = DispatchCase(load, base, kernel)
    results: dict = {"command": "dispatch", "status": "ok", "points": len(load), "step_hours": load.step}

    bench = None
    if bench_path:
        actual = read_series(bench_path)
        if not actual.same_grid(load):
            raise ConfigurationError("benchmark load is on a different time grid")
        bench = benchmark_strategy(case, load.with_values(actual.values))
    if grid:
        if bench is None:
            raise ConfigurationError("an alpha grid needs --benchmark-load to score against")
        search = alpha_grid_search(case, bench, alphas)
        alpha = search.best_alpha
        results["grid"] = search.to_dict()
    else:
        alpha = alphas[0]
    results["alpha"] = alpha

    strategy = compute_strategy(case.with_options(SolverOptions(alpha=alpha)))
    net = leveled_load(case, strategy)
    results["warnings"] = list(strategy.warnings)
    results["variance_load"] = float(np.var(load.values))
    results["variance_net"] = float(np.var(net.values))
    results["peak_load"] = float(np.max(load.values))
    results["peak_net"] = float(np.max(net.values))
    if bench is not None:
        score = score_strategy(strategy, bench)
        results["rmse"] = score.rmse
        results["mae"] = score.mae
    if out_strategy:
        write_series(strategy.as_series(), out_strategy)
    if out_net:
        write_series(net, out_net)
    emit_report(results, report)
    summary = f"alpha={alpha:g}  var(load)={results['variance_load']:.1f}  var(net)={results['variance_net']:.1f}"
    if bench is not None:
        summary += f"  RMSE={results['rmse']:.2f}  MAE={results['mae']:.2f}"
    _echo(ctx, summary)


@main.command("forecast")
@click.option("--history", "history_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--horizon", type=click.IntRange(min=1), default=24, show_default=True)
@click.option("--period", type=click.IntRange(min=1), default=24, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--score-against", "actual_path", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@guarded("forecast")
def forecast_cmd(ctx, history_path, horizon, period, out, actual_path, report):
    """Seasonal-naive forecast of the next HORIZON steps."""
    history = read_series(history_path)
    fc = seasonal_naive(ForecastRequest(history, horizon, period))
    results: dict = {"command": "forecast", "status": "ok", "horizon": horizon, "period": period}
    if out:
        write_series(fc, out)
    if actual_path:
        actual = read_series(actual_path)
        mae, rmse = forecast_metrics(fc, actual)
        results["mae"] = mae
        results["rmse"] = rmse
        _echo(ctx, f"MAE={mae:.4f} RMSE={rmse:.4f}")
    emit_report(results, report)


@main.command("convergence-report")
@click.option("--case", "cases", multiple=True, type=click.Choice(sorted(MANUFACTURED)), help="Repeatable; default: all.")
@click.option("--n-list", default="16,32,64,128", show_default=True)
@click.option("--noise", type=click.FloatRange(min=0.0), default=0.0, show_default=True, help="Uniform noise level added to f samples.")
@click.option("--first-step", type=click.Choice(["collocation", "midpoint"]), default="collocation", show_default=True)
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@click.pass_context
@guarded("convergence-report")
def convergence_cmd(ctx, cases, n_list, noise, first_step, report):
    """Error and observed order on manufactured solutions."""
    try:
        Ns = [int(v) for v in n_list.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"bad --n-list {n_list!r}") from None
    opts = SolverOptions(first_step=first_step)
    rng = np.random.default_rng(ctx.obj["seed"])
    table = {}
    for name in cases or sorted(MANUFACTURED):
        case = get_case(name)
        if noise > 0:
            errs = noisy_errors(case, Ns, noise, rng, opts)
            table[name] = [{"N": N, "max_error": e} for N, e in zip(Ns, errs)]
        else:
            table[name] = [r.to_dict() for r in run_convergence(case, Ns, opts)]
    results = {"command": "convergence-report", "status": "ok", "noise": noise, "cases": table}
    emit_report(results, report)
    for name, rows in table.items():
        _echo(ctx, name)
        for r in rows:
            line = f"  N={r['N']:<6d} error={r['max_error']:.3e}"
            if "order" in r:
                order = r["order"]
                line += "  order=" + ("exact" if r.get("exact") else ("-" if order is None else f"{order:.3f}"))
            _echo(ctx, line)


if __name__ == "__main__":
    main()
