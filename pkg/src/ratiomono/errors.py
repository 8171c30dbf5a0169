"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function being evaluated."""


class NonConvergenceError(ArithmeticError):
    """A truncated sum or adaptive quadrature hit its hard cap."""

    def __init__(self, message, terms_used=None):
        super().__init__(message)
        self.terms_used = terms_used


class DerivativeDegeneracyError(ArithmeticError):
    """The denominator derivative B'(t) vanishes, so H is undefined."""


class DivisionDomainError(ArithmeticError):
    """A ratio denominator is not strictly positive."""


class BracketNotFoundError(ValueError):
    """No sign change was found for a root-finding bracket."""


class OracleEvaluationError(RuntimeError):
    """The sampled function raised while the oracle walked its grid."""

    def __init__(self, message, point):
        super().__init__(message)
        self.point = point
