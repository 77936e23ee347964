"""Exception hierarchy shared by the solver modules."""


class SelfSimError(Exception):
    """Base class for all library errors."""


class InvalidParams(SelfSimError, ValueError):
    pass


class DomainError(SelfSimError, ValueError):
    """Raised when a time or coordinate lies outside the valid domain."""


class Overflow(SelfSimError, OverflowError):
    pass


class DegenerateLeadingTerm(SelfSimError, ArithmeticError):
    """The leading asymptotic coefficient vanishes (Gamma pole in the denominator)."""


class Pole(SelfSimError, ValueError):
    pass


class UnsupportedBranch(SelfSimError, ValueError):
    pass


class RobinSingular(SelfSimError, ArithmeticError):
    pass


class QuadratureError(SelfSimError, RuntimeError):
    pass


class ContourError(SelfSimError, RuntimeError):
    pass


class DivideByZero(SelfSimError, ZeroDivisionError):
    pass


class NonPositiveValues(SelfSimError, ValueError):
    pass


class WindowTooShort(SelfSimError, ValueError):
    pass


class ConfigError(SelfSimError, ValueError):
    pass


class MismatchedProblem(SelfSimError, ValueError):
    pass
