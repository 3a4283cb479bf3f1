"""Exception types shared across the package."""


class WeylHeatError(Exception):
    pass


class InvalidParameter(WeylHeatError, ValueError):
    """Raised for malformed system parameters (k > d, m < 1, t <= 0, ...)."""


class DomainError(WeylHeatError, ValueError):
    """Raised when an argument lies outside the domain of a formula."""


class ConvergenceError(WeylHeatError, RuntimeError):
    """Raised when a series or quadrature cannot reach the requested tolerance."""


class GroupTooLarge(WeylHeatError, RuntimeError):
    pass


class CheckFailure(WeylHeatError, ArithmeticError):
    """A verification check met a violating sample; ``witness`` holds the point."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}
