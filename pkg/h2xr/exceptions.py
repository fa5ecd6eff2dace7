"""
Custom exceptions for the h2xr library.
"""

from typing import Any, Optional


class H2xrError(Exception):
    """Base exception for all h2xr errors."""

    pass


class DomainError(H2xrError):
    """Raised when an input lies outside the domain of an operation."""

    pass


class DegenerateInputError(DomainError):
    """Raised when inputs collapse (coincident points, empty chains, etc.)."""

    pass


class MeshCapacityError(H2xrError):
    """Raised when a mesh would exceed the configured vertex budget."""

    def __init__(self, message: str, suggested_h: Optional[float] = None):
        super().__init__(message)
        self.suggested_h = suggested_h


class ConvergenceError(H2xrError):
    """Raised when the Newton solver does not reach its tolerance."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class SolverIntegrityError(H2xrError):
    """Raised when a solved field violates the discrete maximum principle."""

    pass


class ChartError(H2xrError):
    """Raised when a conformal chart folds over (flipped triangles)."""

    def __init__(self, message: str, distortion: Any = None):
        super().__init__(message)
        self.distortion = distortion


class PeriodError(H2xrError):
    """Raised when a harmonic conjugate would have a nonzero period."""

    pass


class IntegrationError(H2xrError):
    """Raised when frame integration leaves a loop-closure residual above tolerance."""

    def __init__(self, message: str, residuals: Any = None):
        super().__init__(message)
        self.residuals = residuals


class SeamError(H2xrError):
    """Raised when a reflection seam is not on the fixed set of its generator."""

    pass


class ConfigError(H2xrError):
    """Raised when a run configuration cannot be parsed or validated."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key


class AuditGateError(H2xrError):
    """Raised when a pipeline acceptance gate fails."""

    pass
