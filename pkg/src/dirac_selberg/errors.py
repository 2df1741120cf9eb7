"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SelbergError(Exception):
    exit_code = 1
    code = "error"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DomainError(SelbergError, ValueError):
    """Input outside the domain of an operation."""

    exit_code = 2
    code = "domain-error"


class NumericalError(SelbergError, ArithmeticError):
    """Quadrature, fit or cross-check failure."""

    exit_code = 3
    code = "numerical-failure"


class HypothesisViolation(SelbergError):
    """Spin structure is trivial at some cusp, or a pinched class has epsilon = +1."""

    exit_code = 4
    code = "hypothesis-violation"
