from .errors import (
    ArityError,
    BoundaryConditionError,
    ConfigError,
    ContainmentError,
    ErrorMessages,
    ExpressionSyntaxError,
    HamiltonianContractError,
    InvalidInputError,
    OutOfStencilError,
    ParameterError,
    ResolutionError,
    SingularPointError,
    SupremalError,
    UnknownFieldError,
    UnknownIdentifierError,
)
from .logger import Logger
from .printer import Printer

__all__ = [
    "ArityError",
    "BoundaryConditionError",
    "ConfigError",
    "ContainmentError",
    "ErrorMessages",
    "ExpressionSyntaxError",
    "HamiltonianContractError",
    "InvalidInputError",
    "Logger",
    "OutOfStencilError",
    "ParameterError",
    "Printer",
    "ResolutionError",
    "SingularPointError",
    "SupremalError",
    "UnknownFieldError",
    "UnknownIdentifierError",
]
