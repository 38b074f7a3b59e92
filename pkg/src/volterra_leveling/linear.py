"""Direct collocation solver for linear first-kind Volterra equations.

The approximate solution is the continuous piecewise-linear interpolant of
nodal values x_0..x_N.  x_0 comes from differentiating the equation at t=0;
every later x_k comes from requiring the equation to hold at t_k, with the
integrals over [0, t_k] done by the midpoint rule on cells aligned with both
the mesh and the kernel's discontinuity curves.  Written with hat functions
phi_j, row k reads

    sum_{j<=k} W[k, j] x_j = f_k,     W[k, j] = int_0^{t_k} K(t_k, s) phi_j(s) ds

and is solved for x_k in one forward sweep (W is lower triangular).  With
Lavrentiev regularization the row becomes ``alpha*x_k + (W x)_k = f_k``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError, InstabilityError, SingularProblemError, SingularStepError
from .kernel import PiecewiseKernel
from .mesh import CellQuadrature, Mesh, auxiliary_mesh, build_cells, cells_for, row_breakpoints, uniform_mesh
from .mesh import kernel_values

log = logging.getLogger(__name__)

F0_TOL = 1e-9


@dataclass(frozen=True)
class RightHandSide:
    """f(t) given either as a callable or as samples at the mesh nodes."""

    func: Callable | None = None
    values: np.ndarray | None = None
    f_prime_at_0: float | None = None

    def __post_init__(self):
        if (self.func is None) == (self.values is None):
            raise ConfigurationError("right-hand side needs exactly one of func or values")
        if self.values is not None:
            vals = np.array(self.values, dtype=float)
            if vals.ndim != 1 or vals.size < 2:
                raise ConfigurationError("sampled right-hand side needs at least two values")
            if not np.all(np.isfinite(vals)):
                raise ConfigurationError("sampled right-hand side has non-finite values")
            if vals[0] != 0.0:
                raise ConfigurationError(f"f(0) must be exactly 0 for samples, got {vals[0]}")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)
        else:
            f0 = float(np.asarray(self.func(0.0)))
            if abs(f0) > F0_TOL:
                raise ConfigurationError(f"f(0) must vanish, got {f0}")

    @classmethod
    def from_callable(cls, f: Callable, f_prime_at_0: float | None = None) -> "RightHandSide":
        return cls(func=f, f_prime_at_0=f_prime_at_0)

    @classmethod
    def sampled(cls, values, f_prime_at_0: float | None = None) -> "RightHandSide":
        return cls(values=values, f_prime_at_0=f_prime_at_0)

    @property
    def is_sampled(self) -> bool:
        return self.values is not None

    def at_nodes(self, mesh: Mesh) -> np.ndarray:
        if self.values is not None:
            if self.values.size != mesh.N + 1:
                raise ConfigurationError(
                    f"{self.values.size} right-hand-side samples for a mesh with {mesh.N + 1} nodes"
                )
            return np.array(self.values)
        try:
            out = np.array(self.func(mesh.nodes), dtype=float)
            if out.shape != mesh.nodes.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.array([float(self.func(t)) for t in mesh.nodes])
        out[0] = 0.0
        return out

    def derivative_at_zero(self, mesh: Mesh | None = None, T: float = 1.0) -> float:
        if self.f_prime_at_0 is not None:
            return float(self.f_prime_at_0)
        if self.values is not None:
            if mesh is None:
                raise ConfigurationError("a sampled right-hand side needs its mesh to estimate f'(0)")
            return one_sided_derivative(mesh.nodes, self.at_nodes(mesh))
        # second-order one-sided difference with a step well above round-off
        d = 1e-5 * T
        f1, f2 = float(self.func(d)), float(self.func(2 * d))
        return (4.0 * f1 - f2 - 3.0 * float(self.func(0.0))) / (2.0 * d)


def one_sided_derivative(t: np.ndarray, f: np.ndarray) -> float:
    """Second-order forward difference at t[0]; reduces to (-3f0+4f1-f2)/2h on a uniform grid."""
    if t.size < 3:
        return float((f[1] - f[0]) / (t[1] - t[0]))
    h1, h2 = t[1] - t[0], t[2] - t[1]
    c0 = -(2 * h1 + h2) / (h1 * (h1 + h2))
    c1 = (h1 + h2) / (h1 * h2)
    c2 = -h1 / (h2 * (h1 + h2))
    return float(c0 * f[0] + c1 * f[1] + c2 * f[2])


@dataclass(frozen=True)
class PiecewiseLinearSolution:
    mesh: Mesh
    coefficients: np.ndarray
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=float)
        if c.shape != (self.mesh.N + 1,):
            raise ConfigurationError(f"expected {self.mesh.N + 1} coefficients, got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    def __call__(self, t):
        return np.interp(t, self.mesh.nodes, self.coefficients)

    @classmethod
    def from_function(cls, mesh: Mesh, x: Callable) -> "PiecewiseLinearSolution":
        return cls(mesh, np.array([float(x(t)) for t in mesh.nodes]))


@dataclass(frozen=True)
class SolverOptions:
    alpha: float = 0.0
    denominator_tolerance: float = 1e-12
    refine: int = 1
    # "collocation": x_1 from the k=1 collocation row like every later node;
    # "midpoint": x_1 from the one-point midpoint formula
    first_step: str = "collocation"

    def __post_init__(self):
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ConfigurationError(f"alpha must be a finite nonnegative number, got {self.alpha}")
        if not self.denominator_tolerance > 0:
            raise ConfigurationError("denominator_tolerance must be positive")
        if int(self.refine) != self.refine or self.refine < 1:
            raise ConfigurationError("refine must be a positive integer")
        if self.first_step not in ("collocation", "midpoint"):
            raise ConfigurationError(f"unknown first_step {self.first_step!r}")


DEFAULT_OPTIONS = SolverOptions()


def solve_x0(
    kernel: PiecewiseKernel,
    rhs: RightHandSide,
    options: SolverOptions = DEFAULT_OPTIONS,
    mesh: Mesh | None = None,
) -> float:
    """x(0) = f'(0) / sum_i K_i(0,0) [alpha_i'(0) - alpha_{i-1}'(0)]."""
    den = kernel.x0_denominator()
    if not abs(den) > options.denominator_tolerance:
        raise SingularProblemError(f"initial-value denominator {den!r} is (numerically) zero")
    return rhs.derivative_at_zero(mesh, kernel.horizon) / den


def first_node_denominator(kernel: PiecewiseKernel, t1: float) -> float:
    b = kernel.segment_bounds(t1)
    return float(
        sum((b[i + 1] - b[i]) * float(seg(t1, 0.5 * (b[i + 1] + b[i]))) for i, seg in enumerate(kernel.segments))
    )


def solve_first_node(
    kernel: PiecewiseKernel,
    rhs: RightHandSide,
    mesh: Mesh,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """One-point midpoint estimate x_1 = f_1 / sum_i |band_i(t_1)| K_i(t_1, band midpoint)."""
    t1 = float(mesh.nodes[1])
    den = first_node_denominator(kernel, t1)
    if not abs(den) > options.denominator_tolerance:
        raise SingularProblemError(f"first-node denominator {den!r} is (numerically) zero")
    return float(rhs.at_nodes(mesh)[1]) / den


@dataclass(frozen=True)
class CollocationSystem:
    """Lower-triangular collocation weights for one kernel on one mesh."""

    kernel: PiecewiseKernel
    mesh: Mesh
    cells: CellQuadrature
    weights: np.ndarray

    def apply(self, coefficients: np.ndarray) -> np.ndarray:
        """Quadrature of int_0^{t_k} K(t_k,s) x_N(s) ds at every node."""
        return self.weights @ np.asarray(coefficients, dtype=float)

    def with_kernel(self, kernel: PiecewiseKernel) -> "CollocationSystem":
        """Same cells, different kernel (the curves must coincide)."""
        cells = CellQuadrature(
            aux=self.cells.aux,
            kernel=kernel,
            refine=self.cells.refine,
            row=self.cells.row,
            mid=self.cells.mid,
            width=self.cells.width,
            segment=self.cells.segment,
            interval=self.cells.interval,
        )
        return CollocationSystem(kernel, self.mesh, cells, assemble_weights(cells))


def assemble_weights(cells: CellQuadrature) -> np.ndarray:
    n1 = cells.mesh.N + 1
    kw = cells.kernel_values * cells.width
    right = cells.hat_right
    flat = cells.row * n1 + cells.interval
    W = np.bincount(flat, weights=kw * right, minlength=n1 * n1)
    W += np.bincount(flat - 1, weights=kw * (1.0 - right), minlength=n1 * n1)
    return W.reshape(n1, n1)


def collocation_system(kernel: PiecewiseKernel, mesh: Mesh, refine: int = 1) -> CollocationSystem:
    aux = auxiliary_mesh(mesh, kernel)
    cells = build_cells(aux, kernel, refine)
    return CollocationSystem(kernel, mesh, cells, assemble_weights(cells))


def sweep(
    system: CollocationSystem,
    f: np.ndarray,
    x0: float,
    options: SolverOptions = DEFAULT_OPTIONS,
    x1: float | None = None,
) -> np.ndarray:
    """Forward recursion over k=1..N; ``x1`` overrides the k=1 row when given."""
    W = system.weights
    N = system.mesh.N
    x = np.zeros(N + 1)
    x[0] = x0
    start = 1
    if x1 is not None:
        x[1] = x1
        start = 2
    alpha = options.alpha
    tol = options.denominator_tolerance
    for k in range(start, N + 1):
        d = W[k, k] + alpha
        if not abs(d) > tol:
            raise SingularStepError(f"step {k}: divisor {d!r} below tolerance {tol}", step=k)
        x[k] = (f[k] - W[k, :k] @ x[:k]) / d
        if not math.isfinite(x[k]):
            raise InstabilityError(f"step {k}: coefficient is not finite", step=k)
    return x


def solve(
    kernel: PiecewiseKernel,
    rhs: RightHandSide,
    mesh: Mesh,
    options: SolverOptions = DEFAULT_OPTIONS,
    *,
    system: CollocationSystem | None = None,
    x0: float | None = None,
) -> PiecewiseLinearSolution:
    """Solve int_0^t K(t,s) x(s) ds = f(t) (plus alpha*x(t) when regularized).

    ``system`` lets callers reuse assembled weights across right-hand sides;
    ``x0`` overrides the initial-value formula.
    """
    if system is None:
        system = collocation_system(kernel, mesh, options.refine)
    elif system.mesh != mesh:
        raise ConfigurationError("collocation system was built on a different mesh")
    f = rhs.at_nodes(mesh)
    if x0 is None:
        x0 = solve_x0(kernel, rhs, options, mesh)
    warns: list[str] = []
    x1 = None
    if options.first_step == "midpoint":
        den = first_node_denominator(kernel, float(mesh.nodes[1]))
        if abs(den) > options.denominator_tolerance:
            x1 = f[1] / den
        elif options.alpha > 0:
            x1 = f[1] / options.alpha
            warns.append("first-node denominator underflowed; used x_1 = f_1/alpha")
            log.warning(warns[-1])
        else:
            raise SingularStepError(f"step 1: first-node denominator {den!r} below tolerance", step=1)
    x = sweep(system, f, x0, options, x1)
    return PiecewiseLinearSolution(mesh, x, tuple(warns))


def forward_apply(
    kernel: PiecewiseKernel, solution: PiecewiseLinearSolution, t: float, refine: int = 1
) -> float:
    """Midpoint quadrature of int_0^t K(t,s) x_N(s) ds on discontinuity-aligned cells."""
    t = float(t)
    if t == 0.0:
        kernel.segment_bounds(t)
        return 0.0
    mids, widths, _, kv = row_cells(kernel, solution.mesh, t, refine)
    return float(np.sum(kv * widths * solution(mids)))


def row_cells(kernel: PiecewiseKernel, mesh: Mesh, t: float, refine: int = 1):
    """Midpoints, widths, band indices and kernel values of the quadrature cells for one t."""
    bp = row_breakpoints(mesh.nodes, kernel, t)
    mids, widths = cells_for(bp, mesh.h, refine)
    seg = kernel.segment_index(t, mids)
    kv = kernel_values(kernel, np.full(mids.shape, t), mids, seg)
    return mids, widths, seg, kv


def residuals(
    kernel: PiecewiseKernel, solution: PiecewiseLinearSolution, rhs: RightHandSide, refine: int = 1
) -> np.ndarray:
    """forward_apply(t_k) - f_k at every node (no regularization term)."""
    mesh = solution.mesh
    applied = np.array([forward_apply(kernel, solution, t, refine) for t in mesh.nodes])
    return applied - rhs.at_nodes(mesh)


@dataclass(frozen=True)
class ConvergenceRow:
    N: int
    max_error: float
    order: float | None
    exact: bool = False

    def to_dict(self) -> dict:
        return {"N": self.N, "max_error": self.max_error, "order": self.order, "exact": self.exact}


EXACT_FLOOR = 1e-12


def convergence_study(
    kernel: PiecewiseKernel,
    rhs: RightHandSide,
    true_solution: Callable,
    N_list: Sequence[int],
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[ConvergenceRow]:
    """Max nodal error per N and the observed order log(e_i/e_{i+1}) / log(N_{i+1}/N_i).

    Errors at the round-off floor are flagged ``exact`` and get no order.
    """
    N_list = [int(n) for n in N_list]
    if len(N_list) < 2 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ConfigurationError("N_list must be increasing with at least two entries")
    if rhs.is_sampled:
        raise ConfigurationError("convergence studies need a callable right-hand side")
    T = kernel.horizon
    rows: list[ConvergenceRow] = []
    prev = None
    for N in N_list:
        mesh = uniform_mesh(T, N)
        sol = solve(kernel, rhs, mesh, options)
        exact_vals = np.array([float(true_solution(t)) for t in mesh.nodes])
        err = float(np.max(np.abs(sol.coefficients - exact_vals)))
        scale = max(1.0, float(np.max(np.abs(exact_vals))))
        exact = err <= EXACT_FLOOR * scale
        order = None
        if prev is not None and not exact and not prev[2]:
            order = math.log(prev[1] / err) / math.log(N / prev[0])
        rows.append(ConvergenceRow(N, err, order, exact))
        prev = (N, err, exact)
    return rows
