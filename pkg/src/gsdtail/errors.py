"""Exception hierarchy.

Each class carries the process exit code the CLI maps it to.
"""


class GsdError(Exception):
    exit_code = 1


class ArgumentError(GsdError, ValueError):
    """Bad input: wrong shape, out-of-range parameter, violated precondition."""

    exit_code = 2


class ModelValidationError(ArgumentError):
    """A model invariant failed; ``invariant`` names the first one violated."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class MatrixError(ArgumentError):
    """Matrix is singular, not positive definite, or too ill-conditioned."""


class OutOfDomainError(ArgumentError):
    """A tail quantity was requested outside its calibrated region."""


class UnsupportedCaseError(ArgumentError):
    """Inputs fall outside the cases the asymptotic formulas cover."""


class DegeneracyError(GsdError, ArithmeticError):
    """Floating point cannot certify a strict inequality the theory needs.

    ``candidate`` and ``residuals`` describe the closest configuration found.
    """

    exit_code = 3

    def __init__(self, message, candidate=None, residuals=None):
        super().__init__(message)
        self.candidate = candidate
        self.residuals = residuals


class AmbiguityError(DegeneracyError):
    """A quantity sits in the gray zone between 'exactly zero' and 'nonzero'."""


class DivergedError(DegeneracyError):
    """An integral that should be finite diverges for these inputs."""


class AccuracyError(GsdError, ArithmeticError):
    """Two numerical backends disagree beyond their tolerance."""

    exit_code = 4


class OracleFailure(AccuracyError):
    """An iterative reference solver did not converge."""


class InsufficientSamplesError(AccuracyError):
    """Too few Monte Carlo hits to report a meaningful estimate."""
