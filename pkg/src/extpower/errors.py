"""Exception hierarchy shared by all solver modules."""


class ExtPowerError(Exception):
    """Base class for every error raised by this package."""


class ContractViolation(ExtPowerError, ValueError):
    """An argument broke a documented precondition (shape, symmetry, norm)."""


class ZeroVectorError(ExtPowerError, ArithmeticError):
    """A vector collapsed to (numerically) zero length during an iteration."""


class SingularSystemError(ExtPowerError, ArithmeticError):
    """Gaussian elimination met a pivot below threshold.

    Inside an extended or inverse iteration this means the shift sits on, or
    numerically on, an eigenvalue of the shifted operator.
    """


class UnusableSplittingError(ExtPowerError, ValueError):
    """Jacobi / Gauss-Seidel need a nonzero diagonal."""


class NonConvergenceError(ExtPowerError, ArithmeticError):
    """An iterative linear solver ran out of sweeps.

    The last iterate and its relative residual are kept on the exception.
    """

    def __init__(self, message, last_iterate=None, relative_residual=None, sweeps=0):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.relative_residual = relative_residual
        self.sweeps = sweeps


class OracleFailure(ExtPowerError, ArithmeticError):
    """The reference Jacobi-rotation eigensolver missed its residual target."""


class SingularShiftError(ExtPowerError, ValueError):
    """The shift coincides with an eigenvalue of S, so no prediction exists."""


class ProblemError(ExtPowerError, ValueError):
    """A problem document failed schema or consistency validation."""
