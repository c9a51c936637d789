"""Exception and warning types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(ToolkitError, ValueError):
    """Invalid grid sizes, exponents, weights or other input contracts."""


class NumericError(ToolkitError, ArithmeticError):
    """A numerical procedure failed to reach its required accuracy."""


class ConsistencyError(ToolkitError):
    """Two redundant computations of the same quantity disagree."""


class ContractViolation(ToolkitError):
    """An input violates a documented precondition."""


class DegenerateWeightError(ToolkitError):
    """A weight function is too close to zero to divide by."""


class DegenerateDivisionError(ToolkitError):
    """Too many samples of a divisor fall below the division floor."""


class ModulusGuardError(ToolkitError):
    """A prescribed modulus fails the log-integrability guard."""

    def __init__(self, message, clipped_fraction=None):
        super().__init__(message)
        self.clipped_fraction = clipped_fraction


class PairValidationError(ToolkitError):
    """A candidate projection pair failed validation; carries the report."""

    def __init__(self, message, report=None, details=None):
        super().__init__(message)
        self.report = report
        self.details = details or {}


class AliasingWarning(UserWarning):
    """A nonlinear pipeline produced grid-resolution-dependent output."""
