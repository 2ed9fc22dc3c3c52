"""Exception hierarchy shared by the numerical and simulation modules."""


class LevyWalkError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LevyWalkError, ValueError):
    """Parameters outside the admissible range (alpha, dimension, abscissa)."""


class NumericError(LevyWalkError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class ConvergenceError(NumericError):
    pass


class PoleError(NumericError):
    pass


class BranchError(NumericError):
    """A power or logarithm was asked for at a branch point or on an unspecified cut side."""


class ZeroDenominator(NumericError):
    pass


class QuadratureError(NumericError):
    pass


class ExtrapolationError(NumericError):
    pass


class EndpointUnstable(NumericError):
    """Evaluation requested too close to a support edge."""


class RouteParityError(DomainError):
    pass


class InsufficientTail(LevyWalkError):
    pass


class BinError(LevyWalkError, ValueError):
    pass
