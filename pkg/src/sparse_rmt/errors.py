"""Exception hierarchy shared by all modules."""


class SparseRMTError(Exception):
    """Base class for package errors."""


class ConfigurationError(SparseRMTError, ValueError):
    """Invalid ensemble/experiment parameters."""


class DomainError(SparseRMTError, ValueError):
    """Argument outside the mathematical domain of a function."""


class InputError(SparseRMTError, ValueError):
    """Malformed input data (e.g. a non-symmetric matrix)."""


class InsufficientDataError(SparseRMTError, ValueError):
    """Too few samples/replicas for the requested estimator."""


class PreconditionError(SparseRMTError, ValueError):
    """A documented precondition of an operation does not hold."""


class NumericalError(SparseRMTError, ArithmeticError):
    """Non-convergence or numerical breakdown."""


class ParseError(SparseRMTError, ValueError):
    """Syntax error in a formal monomial, with character position."""

    def __init__(self, message, position=None, text=None):
        self.position = position
        self.text = text
        if position is not None:
            message = f"{message} (at position {position})"
            if text is not None:
                message += f"\n  {text}\n  {' ' * position}^"
        super().__init__(message)


class ClassificationError(SparseRMTError, ValueError):
    """A formal monomial fits none of the classes U, V, W."""
