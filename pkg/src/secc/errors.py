class SeccError(Exception):
    """Base class for all package errors."""


class ConfigurationError(SeccError, ValueError):
    """Invalid sizes, rates or profile parameters."""


class DomainError(SeccError, ValueError):
    """Argument outside the domain of a numerical function."""


class RankError(SeccError, ValueError):
    """Matrix is numerically rank deficient."""


class BracketError(SeccError, ValueError):
    """Bisection bracket does not straddle the transition."""


class DivergenceError(SeccError, ArithmeticError):
    """An iteration produced non-finite values."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite value at iteration {iteration}")
