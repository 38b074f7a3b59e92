"""Exception hierarchy.

Configuration/format problems map to CLI exit code 2, numerical failures to 3.
Each numerical error carries a ``kind`` string used in JSON reports.
"""

from __future__ import annotations


class VolterraError(Exception):
    kind = "error"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "message": str(self)}


class ConfigurationError(VolterraError, ValueError):
    kind = "configuration"


class FormatError(ConfigurationError):
    kind = "format"

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.row is not None:
            d["row"] = self.row
        return d


class DomainError(VolterraError, ValueError):
    kind = "domain"


class NumericalError(VolterraError, ArithmeticError):
    kind = "numerical"


class SingularProblemError(NumericalError):
    kind = "singular-problem"


class SingularStepError(NumericalError):
    kind = "singular-step"

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["step"] = self.step
        return d


class InstabilityError(SingularStepError):
    kind = "instability"


class DivergenceError(NumericalError):
    kind = "divergence"

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.trace is not None:
            d["trace"] = self.trace.to_dict()
        return d


class DiagnosticUnavailableError(VolterraError):
    kind = "diagnostic-unavailable"


class EvaluationError(NumericalError):
    kind = "evaluation"
