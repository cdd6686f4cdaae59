"""Exception hierarchy shared by the library and the CLI."""

from typing import Any


class AorcError(Exception):
    """Base class for all errors raised by aorc."""

    pass


class DomainError(AorcError, ValueError):
    """An argument lies outside the domain of a numerical operation."""

    pass


class CurveError(DomainError):
    """Invalid rejection curve parameters or curve arguments."""

    pass


class ProcedureError(DomainError):
    """Invalid input to a stepwise decision procedure."""

    pass


class ExactEngineError(DomainError):
    """Invalid input to the exact Dirac-uniform engine."""

    pass


class SimulationError(DomainError):
    """Invalid data-generating model or replication settings."""

    pass


class CalibrationError(DomainError):
    """Calibration could not certify its bisection search."""

    def __init__(self, message: str, trace: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.trace = trace or []


class SizeCapError(AorcError):
    """The requested configuration exceeds the exact engine's size cap."""

    pass


class InputFileError(AorcError):
    """A p-value input file could not be read or parsed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line

    def details(self) -> dict[str, Any]:
        return {"line": self.line} if self.line is not None else {}
