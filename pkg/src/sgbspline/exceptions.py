"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """Raised when an argument lies outside the domain an operation supports."""


class HierarchizationError(RuntimeError):
    """Raised when a hierarchization system cannot be solved reliably.

    Attributes
    ----------
    condition : float or None
        Estimated condition number of the offending matrix, if available.
    """

    def __init__(self, message: str, condition: float | None = None):
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
        self.condition = condition


class ConvergenceError(RuntimeError):
    """Raised when an iterative method stops without meeting its tolerance."""

    def __init__(self, message: str, iterations: int, residual: float):
        super().__init__(f"{message} after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class InfeasibleError(RuntimeError):
    """Raised when no feasible point of a constrained problem could be found."""

    def __init__(self, message: str, slack: float):
        super().__init__(f"{message} (minimal slack {slack:.3e})")
        self.slack = slack
