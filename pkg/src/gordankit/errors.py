"""Exception types shared across the package."""


class GordanKitError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(GordanKitError, ValueError):
    """Operands describe incompatible dimensions."""


class NumericError(GordanKitError, ArithmeticError):
    """A numerical routine failed to converge or produced invalid output."""


class UnsupportedDomainError(GordanKitError, ValueError):
    """The requested domain is not handled by this operation."""


class WeightError(GordanKitError, ValueError):
    """A multiplier vector violates its positivity or normalization contract."""


class BudgetExceededError(GordanKitError, ValueError):
    """An enumeration would exceed the configured size budget."""


class InternalConsistencyError(GordanKitError, RuntimeError):
    """Both alternatives verified simultaneously; indicates a broken invariant."""


class IndeterminateOutcomeError(GordanKitError, RuntimeError):
    """A decision procedure ended inside its tolerance band."""

    def __init__(self, message, outcome=None):
        super().__init__(message)
        self.outcome = outcome
