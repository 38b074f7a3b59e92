"""Piecewise-kernel Volterra equations of the first kind and their use for storage load leveling."""

from .errors import (
    ConfigurationError,
    DiagnosticUnavailableError,
    DivergenceError,
    DomainError,
    FormatError,
    InstabilityError,
    NumericalError,
    SingularProblemError,
    SingularStepError,
    VolterraError,
)
from .kernel import (
    BoundaryCurve,
    KernelSegment,
    PiecewiseKernel,
    ValidationReport,
    identity_kernel,
    voltker_kernel,
)
from .mesh import AuxiliaryMesh, Mesh, auxiliary_mesh, uniform_mesh
from .linear import (
    PiecewiseLinearSolution,
    RightHandSide,
    SolverOptions,
    convergence_study,
    forward_apply,
    solve,
    solve_first_node,
    solve_x0,
)

__version__ = "0.1.0"

__all__ = [
    "AuxiliaryMesh",
    "BoundaryCurve",
    "ConfigurationError",
    "DiagnosticUnavailableError",
    "DivergenceError",
    "DomainError",
    "FormatError",
    "InstabilityError",
    "KernelSegment",
    "Mesh",
    "NumericalError",
    "PiecewiseKernel",
    "PiecewiseLinearSolution",
    "RightHandSide",
    "SingularProblemError",
    "SingularStepError",
    "SolverOptions",
    "ValidationReport",
    "VolterraError",
    "auxiliary_mesh",
    "convergence_study",
    "forward_apply",
    "identity_kernel",
    "solve",
    "solve_first_node",
    "solve_x0",
    "uniform_mesh",
    "voltker_kernel",
]
