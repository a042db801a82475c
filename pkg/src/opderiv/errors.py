"""Exception types shared across the package."""


class OpDerivError(Exception):
    """Base class for all errors raised by :mod:`opderiv`."""


class ValidationError(OpDerivError, ValueError):
    """Malformed or inconsistent input (non-Hermitian D, bad shapes, bad JSON)."""


class DecompositionMismatch(ValidationError):
    """Two block matrices are expressed in different band decompositions."""


class NumericalError(OpDerivError, ArithmeticError):
    """An eigensolver or norm computation failed to meet its accuracy contract."""


class NotDifferentiableError(OpDerivError):
    """A norm needs a derivative whose boundedness verdict is not ``Bounded``."""
