"""Modified Newton-Kantorovich iteration for nonlinear first-kind equations.

Solves

    sum_i int_{alpha_{i-1}(t)}^{alpha_i(t)} K_i(t,s) G_i(s, x(s)) ds = f(t)

by freezing the derivative at the initial guess x_init.  Each iteration is a
linear first-kind equation with kernel K_i(t,s) * dG_i/dx(s, x_init(s)) and
right-hand side

    psi_m(t) = f(t) + sum_i int K_i [dG_i/dx(s, x_init) x_m - G_i(s, x_m)] ds

handled by the collocation sweep of :mod:`volterra_leveling.linear`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DiagnosticUnavailableError,
    DivergenceError,
    EvaluationError,
    InstabilityError,
    SingularProblemError,
    SingularStepError,
)
from .kernel import KernelSegment, PiecewiseKernel
from .linear import (
    DEFAULT_OPTIONS,
    CollocationSystem,
    PiecewiseLinearSolution,
    RightHandSide,
    SolverOptions,
    collocation_system,
    row_cells,
    sweep,
)
from .mesh import Mesh

GFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

FD_STEP = 1e-6

# one midpoint per cell is too coarse for G(x(s)) when dG/dx vanishes at the origin
NONLINEAR_OPTIONS = SolverOptions(refine=4)


def central_difference(g: GFn) -> GFn:
    def gx(s, x):
        x = np.asarray(x, dtype=float)
        d = FD_STEP * np.maximum(1.0, np.abs(x))
        return (np.asarray(g(s, x + d)) - np.asarray(g(s, x - d))) / (2.0 * d)

    return gx


@dataclass(frozen=True)
class NonlinearProblem:
    kernel: PiecewiseKernel
    nonlinearities: tuple[GFn, ...]
    rhs: RightHandSide
    derivatives: tuple[GFn | None, ...] | None = None

    def __post_init__(self):
        gs = tuple(self.nonlinearities)
        n = self.kernel.n
        if len(gs) != n:
            raise ConfigurationError(f"need {n} nonlinearities (one per kernel segment), got {len(gs)}")
        ds = tuple(self.derivatives) if self.derivatives is not None else (None,) * n
        if len(ds) != n:
            raise ConfigurationError(f"need {n} nonlinearity derivatives, got {len(ds)}")
        object.__setattr__(self, "nonlinearities", gs)
        object.__setattr__(self, "derivatives", tuple(d if d is not None else central_difference(g) for g, d in zip(gs, ds)))

    @classmethod
    def uniform(cls, kernel: PiecewiseKernel, g: GFn, rhs: RightHandSide, gx: GFn | None = None):
        """Same nonlinearity on every segment."""
        return cls(kernel, (g,) * kernel.n, rhs, (gx,) * kernel.n)

    def g(self, i: int, s, x) -> np.ndarray:
        return np.asarray(self.nonlinearities[i](s, x), dtype=float) * np.ones(np.broadcast(s, x).shape)

    def gx(self, i: int, s, x) -> np.ndarray:
        return np.asarray(self.derivatives[i](s, x), dtype=float) * np.ones(np.broadcast(s, x).shape)

    def origin_weights(self) -> np.ndarray:
        """K_i(0,0) * (alpha_i'(0) - alpha_{i-1}'(0)) per segment."""
        slopes = [0.0, *(float(b.derivative(0.0)) for b in self.kernel.boundaries), 1.0]
        return np.array([float(seg(0.0, 0.0)) * (slopes[i + 1] - slopes[i]) for i, seg in enumerate(self.kernel.segments)])


@dataclass
class IterationTrace:
    update_norms: list[float] = field(default_factory=list)
    residual_norms: list[float] = field(default_factory=list)
    converged: bool = False
    max_iterations_hit: bool = False
    diverged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.update_norms)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "update_norms": list(self.update_norms),
            "residual_norms": list(self.residual_norms),
            "converged": self.converged,
            "max_iterations_hit": self.max_iterations_hit,
            "diverged": self.diverged,
        }


def linearized_kernel(problem: NonlinearProblem, x0: PiecewiseLinearSolution) -> PiecewiseKernel:
    """Segments K_i(t,s) * dG_i/dx(s, x0(s)) on the original curves."""
    probe = problem.gx
    for i in range(problem.kernel.n):
        vals = probe(i, x0.mesh.nodes, x0.coefficients)
        if not np.all(np.isfinite(vals)):
            bad = int(np.nonzero(~np.isfinite(vals))[0][0])
            raise EvaluationError(f"dG_{i + 1}/dx is not finite at s={x0.mesh.nodes[bad]}")

    def make(i: int, seg: KernelSegment) -> KernelSegment:
        return KernelSegment(func=lambda t, s: seg(t, s) * problem.gx(i, s, x0(s)), label=f"K_{i + 1}*G_x")

    segments = tuple(make(i, seg) for i, seg in enumerate(problem.kernel.segments))
    return PiecewiseKernel(segments, problem.kernel.boundaries, problem.kernel.horizon)


def _operator_rows(problem: NonlinearProblem, system: CollocationSystem, coeffs: np.ndarray) -> np.ndarray:
    """sum_i int K_i(t_k,s) G_i(s, x(s)) ds at every node, on the system's cells."""
    cells = system.cells
    xm = cells.interpolate(coeffs)
    gv = np.empty_like(xm)
    for i in range(problem.kernel.n):
        mask = cells.segment == i
        if mask.any():
            gv[mask] = problem.g(i, cells.mid[mask], xm[mask])
    return cells.row_sums(cells.kernel_values * cells.width * gv)


def residual(problem: NonlinearProblem, x: PiecewiseLinearSolution, t: float, refine: int = 1) -> float:
    """(Fx)(t) = sum_i int K_i G_i(s, x(s)) ds - f(t)."""
    t = float(t)
    f_t = _rhs_value(problem.rhs, x.mesh, t)
    if t == 0.0:
        problem.kernel.segment_bounds(t)
        return -f_t
    mids, widths, seg, kv = row_cells(problem.kernel, x.mesh, t, refine)
    xm = x(mids)
    gv = np.empty_like(xm)
    for i in range(problem.kernel.n):
        mask = seg == i
        if mask.any():
            gv[mask] = problem.g(i, mids[mask], xm[mask])
    return float(np.sum(kv * widths * gv)) - f_t


def _rhs_value(rhs: RightHandSide, mesh: Mesh, t: float) -> float:
    if rhs.is_sampled:
        return float(np.interp(t, mesh.nodes, rhs.at_nodes(mesh)))
    return float(rhs.func(t))


def _solve_origin(problem: NonlinearProblem, fp0: float, guess: float) -> float:
    """Scalar Newton for sum_i w_i G_i(0, xi) = f'(0), the nonlinear initial-value equation."""
    w = problem.origin_weights()
    xi = float(guess)
    nudges = 0
    for _ in range(200):
        phi = sum(w[i] * float(problem.g(i, 0.0, xi)) for i in range(len(w))) - fp0
        if phi == 0.0:
            return xi
        dphi = sum(w[i] * float(problem.gx(i, 0.0, xi)) for i in range(len(w)))
        if dphi == 0.0:
            if abs(phi) <= 1e-12 * (1.0 + abs(fp0)):
                return xi
            if nudges >= 8:
                raise SingularProblemError("initial-value equation has a vanishing derivative away from its root")
            # flat point, e.g. G = x^3 at 0: step off it toward the residual's sign change
            nudges += 1
            xi -= math.copysign(1e-3 * (1.0 + abs(xi)), phi)
            continue
        step = phi / dphi
        xi -= step
        if abs(step) <= 1e-15 * (1.0 + abs(xi)):
            return xi
    return xi


@dataclass(frozen=True)
class NonlinearResult:
    solution: PiecewiseLinearSolution
    trace: IterationTrace
    frozen_kernel: PiecewiseKernel

    def __iter__(self):
        # allows ``solution, trace = solve(...)``
        return iter((self.solution, self.trace))


def default_initial_guess(
    problem: NonlinearProblem, mesh: Mesh, options: SolverOptions = NONLINEAR_OPTIONS
) -> PiecewiseLinearSolution:
    """Solve the problem with each G_i replaced by its linearization about x = 0."""
    zero = PiecewiseLinearSolution(mesh, np.zeros(mesh.N + 1))
    base = collocation_system(problem.kernel, mesh, options.refine)
    frozen = linearized_kernel(problem, zero)
    system = base.with_kernel(frozen)
    f = problem.rhs.at_nodes(mesh)
    psi = f - _operator_rows(problem, base, zero.coefficients)
    psi[0] = 0.0
    w = problem.origin_weights()
    den = float(sum(w[i] * float(problem.gx(i, 0.0, 0.0)) for i in range(len(w))))
    fp0 = problem.rhs.derivative_at_zero(mesh, problem.kernel.horizon)
    psi_p0 = fp0 - float(sum(w[i] * float(problem.g(i, 0.0, 0.0)) for i in range(len(w))))
    if not abs(den) > options.denominator_tolerance:
        raise SingularProblemError(
            "linearization about x = 0 is singular at the origin; supply an initial guess"
        )
    return PiecewiseLinearSolution(mesh, sweep(system, psi, psi_p0 / den, options))


def solve(
    problem: NonlinearProblem,
    mesh: Mesh,
    x_init: PiecewiseLinearSolution | None = None,
    tolerance: float = 1e-8,
    max_iterations: int = 50,
    options: SolverOptions = NONLINEAR_OPTIONS,
) -> NonlinearResult:
    """Iterate x_{m+1} = linear solve(frozen kernel, psi_m) until the nodal update is below ``tolerance``.

    Raises DivergenceError (carrying the trace) once the update norm has grown
    three iterations in a row.  Hitting ``max_iterations`` is reported in the
    trace, not raised.
    """
    if not tolerance > 0:
        raise ConfigurationError("tolerance must be positive")
    if max_iterations < 1:
        raise ConfigurationError("max_iterations must be positive")
    if x_init is None:
        x_init = default_initial_guess(problem, mesh, options)
    elif x_init.mesh != mesh:
        x_init = PiecewiseLinearSolution(mesh, x_init(mesh.nodes))

    base = collocation_system(problem.kernel, mesh, options.refine)
    frozen = linearized_kernel(problem, x_init)
    system = base.with_kernel(frozen)

    f = problem.rhs.at_nodes(mesh)
    fp0 = problem.rhs.derivative_at_zero(mesh, problem.kernel.horizon)
    w = problem.origin_weights()
    xi0 = float(x_init.coefficients[0])
    den = float(sum(w[i] * float(problem.gx(i, 0.0, xi0)) for i in range(len(w))))
    # a frozen kernel vanishing at the origin gives no x(0) update; solve the nodal equation directly
    origin = None if abs(den) > options.denominator_tolerance else _solve_origin(problem, fp0, xi0)

    trace = IterationTrace()
    x = np.array(x_init.coefficients)
    growth = 0
    for m in range(max_iterations):
        applied = _operator_rows(problem, base, x)
        trace.residual_norms.append(float(np.max(np.abs(applied - f))))
        psi = f + system.apply(x) - applied
        psi[0] = 0.0
        if origin is None:
            g0 = np.array([float(problem.g(i, 0.0, x[0])) for i in range(len(w))])
            gx0 = np.array([float(problem.gx(i, 0.0, xi0)) for i in range(len(w))])
            x0_next = (fp0 + float(np.sum(w * (gx0 * x[0] - g0)))) / den
        else:
            x0_next = origin
        try:
            x_next = sweep(system, psi, x0_next, options)
        except SingularStepError as exc:
            cls = InstabilityError if isinstance(exc, InstabilityError) else SingularStepError
            raise cls(f"iteration {m}: {exc}", step=exc.step) from exc
        upd = float(np.max(np.abs(x_next - x)))
        x = x_next
        if trace.update_norms and upd > trace.update_norms[-1]:
            growth += 1
        else:
            growth = 0
        trace.update_norms.append(upd)
        if upd <= tolerance:
            trace.converged = True
            break
        if growth >= 3 or not math.isfinite(upd):
            trace.diverged = True
            raise DivergenceError(f"update norm grew for {growth} consecutive iterations at iteration {m}", trace)
    else:
        trace.max_iterations_hit = True
    return NonlinearResult(PiecewiseLinearSolution(mesh, x), trace, frozen)


@dataclass(frozen=True)
class KantorovichDiagnostics:
    eta: float
    rate_estimate: float
    h_estimate: float | None
    bound_satisfied: bool

    def to_dict(self) -> dict:
        return {
            "eta": self.eta,
            "rate_estimate": self.rate_estimate,
            "h_estimate": self.h_estimate,
            "bound_satisfied": self.bound_satisfied,
        }


def kantorovich_diagnostics(trace: IterationTrace) -> KantorovichDiagnostics:
    """Empirical check of the Kantorovich convergence envelope.

    ``eta`` is the first update norm.  The rate q is a least-squares geometric
    fit to the update norms, and h is recovered from q = 1 - sqrt(1 - 2h).
    The bound holds when the run converged, h < 1/2 and every update norm d_m
    stays below (eta/h) q^(m+1) (1 + q), the triangle-inequality consequence
    of the a-priori error estimate.  A stalled run can fit q < 1 with a loose
    envelope, hence the convergence requirement.
    """
    d = np.asarray(trace.update_norms, dtype=float)
    if d.size < 3:
        raise DiagnosticUnavailableError(f"need at least 3 iterations, trace has {d.size}")
    eta = float(d[0])
    usable = np.isfinite(d) & (d > 1e-300)
    m = np.arange(d.size)[usable]
    if m.size < 2:
        raise DiagnosticUnavailableError("update norms are not usable for a rate fit")
    slope = np.polyfit(m, np.log(d[usable]), 1)[0]
    q = float(np.exp(slope))
    if not q < 1.0:
        return KantorovichDiagnostics(eta, q, None, False)
    h = q - 0.5 * q * q
    envelope = (eta / h) * q ** (np.arange(d.size) + 1) * (1.0 + q)
    ok = bool(trace.converged and np.all(d <= envelope * (1 + 1e-9)))
    return KantorovichDiagnostics(eta, q, h, ok)


# -- built-in nonlinearities ---------------------------------------------------------


def _power(p: float):
    if float(p).is_integer():
        n = int(p)
        return (lambda s, x: np.asarray(x, float) ** n), (lambda s, x: n * np.asarray(x, float) ** (n - 1))
    return (
        lambda s, x: np.sign(x) * np.abs(x) ** p,
        lambda s, x: p * np.abs(x) ** (p - 1),
    )


def _tanh(c: float):
    return (lambda s, x: c * np.tanh(np.asarray(x, float) / c)), (lambda s, x: 1.0 / np.cosh(np.asarray(x, float) / c) ** 2)


def _saturating(c: float):
    return (
        lambda s, x: np.asarray(x, float) / (1.0 + np.abs(x) / c),
        lambda s, x: 1.0 / (1.0 + np.abs(x) / c) ** 2,
    )


def builtin_nonlinearity(name: str) -> tuple[GFn, GFn]:
    """Parse ``linear``, ``cube``, ``power:P``, ``tanh:C`` or ``saturating:C`` into (G, dG/dx)."""
    key, _, arg = name.partition(":")
    try:
        if key == "linear" and not arg:
            return (lambda s, x: np.asarray(x, float)), (lambda s, x: np.ones(np.shape(x)))
        if key == "cube" and not arg:
            return _power(3)
        if key == "power":
            return _power(float(arg))
        if key in ("tanh", "saturating"):
            c = float(arg) if arg else 1.0
            if not c > 0:
                raise ValueError
            return _tanh(c) if key == "tanh" else _saturating(c)
    except ValueError:
        pass
    raise ConfigurationError(f"unknown nonlinearity {name!r}")


BUILTIN_NONLINEARITIES: Sequence[str] = ("linear", "cube", "power:P", "tanh:C", "saturating:C")
