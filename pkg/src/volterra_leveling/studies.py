"""Manufactured-solution cases and the convergence / noise studies built on them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigurationError
from .kernel import PiecewiseKernel, identity_kernel, voltker_kernel
from .linear import DEFAULT_OPTIONS, RightHandSide, SolverOptions, convergence_study, solve
from .mesh import uniform_mesh

# bands (0, t/4), (t/4, 3t/4), (3t/4, t) with efficiencies 1, 0.9, 0.85
_VOLT_C = (1.0, 0.9, 0.85)
_VOLT_R = (0.0, 0.25, 0.75, 1.0)


def _banded_monomial(p: int) -> float:
    """int_0^t K(t,s) s^p ds = c_p t^(p+1) for the three-band efficiency kernel."""
    return sum(c * (b**(p + 1) - a**(p + 1)) / (p + 1) for c, a, b in zip(_VOLT_C, _VOLT_R, _VOLT_R[1:]))


def _banded_sine(t):
    t = np.asarray(t, dtype=float)
    c4, c34 = np.cos(t / 4), np.cos(3 * t / 4)
    return 1.0 - c4 + 0.9 * (c4 - c34) + 0.85 * (c34 - np.cos(t))


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    kernel_factory: Callable[[float], PiecewiseKernel]
    f: Callable
    f_prime_at_0: float
    solution: Callable
    T: float = 1.0

    def kernel(self, T: float | None = None) -> PiecewiseKernel:
        return self.kernel_factory(self.T if T is None else T)

    def rhs(self) -> RightHandSide:
        return RightHandSide.from_callable(self.f, self.f_prime_at_0)


MANUFACTURED: dict[str, ManufacturedCase] = {
    c.name: c
    for c in (
        ManufacturedCase("identity-constant", identity_kernel, lambda t: np.asarray(t, float), 1.0, lambda s: np.ones_like(np.asarray(s, float))),
        ManufacturedCase("voltker-constant", voltker_kernel, lambda t: _banded_monomial(0) * np.asarray(t, float), _banded_monomial(0), lambda s: np.ones_like(np.asarray(s, float))),
        ManufacturedCase("voltker-linear", voltker_kernel, lambda t: _banded_monomial(1) * np.asarray(t, float) ** 2, 0.0, lambda s: np.asarray(s, float)),
        ManufacturedCase("voltker-quadratic", voltker_kernel, lambda t: _banded_monomial(2) * np.asarray(t, float) ** 3, 0.0, lambda s: np.asarray(s, float) ** 2),
        ManufacturedCase("voltker-sine", voltker_kernel, _banded_sine, 0.0, np.sin),
        ManufacturedCase("voltker-sine-long", voltker_kernel, _banded_sine, 0.0, np.sin, T=10.0),
    )
}


def get_case(name: str) -> ManufacturedCase:
    try:
        return MANUFACTURED[name]
    except KeyError:
        raise ConfigurationError(f"unknown manufactured case {name!r}; choose from {sorted(MANUFACTURED)}") from None


def run_convergence(case: ManufacturedCase, N_list: Sequence[int], options: SolverOptions = DEFAULT_OPTIONS):
    return convergence_study(case.kernel(), case.rhs(), case.solution, N_list, options)


def noisy_errors(
    case: ManufacturedCase,
    N_list: Sequence[int],
    delta: float,
    rng: np.random.Generator,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[float]:
    """Max nodal error per N with uniform noise on [-delta, delta] added to f_1..f_N.

    f'(0) is estimated from the noisy samples, as it would be for measured data.
    """
    kernel = case.kernel()
    out = []
    for N in N_list:
        mesh = uniform_mesh(case.T, N)
        f = np.asarray(case.f(mesh.nodes), dtype=float).copy()
        f[0] = 0.0
        f[1:] += rng.uniform(-delta, delta, N)
        sol = solve(kernel, RightHandSide.sampled(f), mesh, options)
        out.append(float(np.max(np.abs(sol.coefficients - case.solution(mesh.nodes)))))
    return out
