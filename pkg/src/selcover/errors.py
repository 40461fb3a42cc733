"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class DomainError(ValidationError):
    """Numeric argument outside the domain of an operation."""


class LabelMismatchError(ValidationError):
    """Two distributions are not defined on the same ordered label set."""


class NotPositiveSemidefiniteError(ValidationError):
    """A matrix expected to be positive semidefinite failed factorization."""


class UndefinedConditionalError(ValidationError):
    """Conditioning on an event of probability zero."""
