# src/errors.py
"""Exception hierarchy shared by the library and the CLI.

Every error subclasses a builtin (ValueError / RuntimeError) so callers that
only know the builtins keep working. The CLI maps them to exit codes:
ingestion and dimension problems -> 2, failed numerical checks -> 1.
"""

from __future__ import annotations

from typing import Any, Optional


class GetzlerError(Exception):
    """Root of the package's exceptions."""


class DimensionError(GetzlerError, ValueError):
    """Mismatched, odd or unsupported dimension."""


class DomainError(GetzlerError, ValueError):
    """Argument outside the region where an operation is defined."""


class SingularPrimitiveError(DomainError):
    """Analytic primitive evaluated on a pole or branch cut."""


class UnboundedOrderError(GetzlerError, ValueError):
    """Getzler order undefined (empty kernel) or larger than the dimension."""


class ConvergenceError(GetzlerError, RuntimeError):
    """Series, spectral sum or convergence study did not converge."""


class IdentityMismatchError(GetzlerError, RuntimeError):
    """An identity that must hold exactly failed beyond tolerance."""

    def __init__(self, name: str, max_error: float, tolerance: float, values: Optional[Any] = None):
        self.name = name
        self.max_error = float(max_error)
        self.tolerance = float(tolerance)
        self.values = values
        super().__init__(f"{name}: max error {self.max_error:.3e} exceeds tolerance {self.tolerance:.1e}")


class IngestionError(GetzlerError, ValueError):
    """Malformed or inconsistent curvature input."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(f"{where}{message}")
