"""Exception hierarchy. Every error carries a stable machine-readable code."""


class FormacalcError(Exception):
    code = "E_INTERNAL"


class SpaceMismatch(FormacalcError, ValueError):
    code = "E_SPACE"


class DegreeMismatch(FormacalcError, ValueError):
    code = "E_DEGREE"


class OrderExhausted(FormacalcError, ValueError):
    """A truncated series was asked for coefficients it does not know."""

    code = "E_ORDER"


class NotInvertible(FormacalcError, ArithmeticError):
    code = "E_NOT_INVERTIBLE"


class DomainError(FormacalcError, ValueError):
    code = "E_DOMAIN"


class HomotopyError(FormacalcError):
    """A homotopy identity produced a nonzero residual."""

    code = "E_HOMOTOPY"

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class InternalInconsistency(FormacalcError, AssertionError):
    code = "E_INTERNAL"


class LimitExceeded(FormacalcError):
    """A configured resource limit (e.g. maximum polynomial degree) was exceeded."""

    code = "E_LIMIT"
