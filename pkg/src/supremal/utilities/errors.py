"""Error definitions for supremal operations."""
from typing import Optional


class SupremalError(Exception):
    """Base exception class for supremal errors."""

    def __init__(self, message: str, original_error: Optional[Exception] = None):
        """Initialize the error.

        Args:
            message: The error message to display
            original_error: The original exception that caused this error, if any
        """
        super().__init__(message)
        self.original_error = original_error


class InvalidInputError(SupremalError, ValueError):
    """Raised for non-finite, empty or otherwise malformed inputs."""


class OutOfStencilError(SupremalError, IndexError):
    """Raised when a finite-difference stencil leaves the grid."""


class ContainmentError(SupremalError, ValueError):
    """Raised when a ball or support is not compactly inside its parent set."""


class HamiltonianContractError(SupremalError, ValueError):
    """Raised when a Hamiltonian evaluates to a negative or non-finite value."""


class ExpressionSyntaxError(SupremalError, ValueError):
    """Raised by the expression parser, carrying a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownIdentifierError(ExpressionSyntaxError):
    """Raised for identifiers outside the expression grammar or the declared dims."""


class ArityError(ExpressionSyntaxError):
    """Raised when a function is called with the wrong number of arguments."""


class BoundaryConditionError(SupremalError, ValueError):
    """Raised when a test function does not vanish on the subdomain boundary."""


class ParameterError(SupremalError, ValueError):
    """Raised for parameters outside their admissible range."""


class ResolutionError(SupremalError, ValueError):
    """Raised when a construction is too fine for the grid spacing."""


class SingularPointError(SupremalError, ValueError):
    """Raised when an analytic closure is evaluated on its declared singular set."""


class UnknownFieldError(SupremalError, KeyError):
    """Raised for gallery names that are not in the catalog."""


class ConfigError(SupremalError, ValueError):
    """Raised for invalid run configurations."""


class ErrorMessages:
    """Standardized error message templates."""

    NON_FINITE: str = "Non-finite entries in {}"
    EMPTY_MASK: str = "Empty mask: {}"
    STENCIL: str = "Grid point {} has no full stencil"
    NOT_CONTAINED: str = "Set is not compactly contained: {}"
    DIMENSION: str = "Dimension mismatch: {}"
    CONTRACT: str = "Hamiltonian contract violated: {}"

    @classmethod
    def format_error(cls, template: str, detail: object) -> str:
        """Format an error message with the given template and detail.

        Args:
            template: The error message template to use
            detail: The object to format into the template

        Returns:
            The formatted error message
        """
        return template.format(str(detail))
