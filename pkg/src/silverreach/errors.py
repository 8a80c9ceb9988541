"""Exception hierarchy.

Every exception carries a short machine-readable ``code`` that the command
line front end copies into its error object.
"""

from __future__ import annotations


class SilverReachError(Exception):
    """Base class for all package errors.

    ``code`` defaults to the class attribute but may be refined per raise
    site, e.g. ``ValidationError("...", code="invalid_grid")``.
    """

    code = "error"

    def __init__(self, message: str = "", *, code: str | None = None) -> None:
        super().__init__(message)
        if code is not None:
            self.code = code


class ValidationError(SilverReachError, ValueError):
    """A parameter violates a type invariant or an operation precondition."""

    code = "invalid_argument"


class DomainError(ValidationError):
    """Argument outside the domain of a scalar function."""

    code = "domain_error"


class MixedClassError(ValidationError):
    """Operation needs both poles on the same side but the pair is mixed."""

    code = "mixed_class"


class NotMixedError(ValidationError):
    """Operation needs a mixed stable/unstable pair."""

    code = "not_mixed"


class DegenerateSystemError(SilverReachError, ArithmeticError):
    """Equal time constants (or equal poles) collapse the reachable set."""

    code = "degenerate_system"


class SingularGramianError(DegenerateSystemError):
    """Target lies outside the range of a singular Gramian."""

    code = "singular_gramian"


class NonConvergenceError(SilverReachError, ArithmeticError):
    code = "non_convergence"


class InfeasibleDiscretizationError(SilverReachError, ArithmeticError):
    """The discretized boundary-value constraints cannot be met."""

    code = "infeasible_discretization"


class HorizonTooShortError(SilverReachError, ArithmeticError):
    """Endpoint residuals stay above tolerance after the solve."""

    code = "horizon_too_short"


class DegenerateSystemWarning(UserWarning):
    """Issued when a degenerate configuration yields a flagged result."""
