"""Exception hierarchy.

Validation failures (bad inputs, malformed states) map to CLI exit code 2;
numerical-tolerance failures (truncation, unresolved grids) map to exit 3.
"""


class BellforgeError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ValidationError(BellforgeError):
    """Input violates a documented precondition or schema."""

    exit_code = 2


class NormalizationError(ValidationError):
    """State vector or distribution is not normalized within tolerance."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of the operation."""


class ToleranceError(BellforgeError):
    """A numerical check failed beyond its documented tolerance."""

    exit_code = 3


class TruncationError(ToleranceError):
    """Grid extent too small; probability mass lost off the edges."""


class GridResolutionError(ToleranceError):
    """Grid too coarse to resolve the quantity being computed."""
