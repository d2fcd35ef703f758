"""Exception hierarchy shared by all modules."""


class ScherkError(ValueError):
    """Base class for domain errors raised by this package."""


class InvalidAngle(ScherkError):
    pass


class CorePoint(ScherkError):
    """Evaluation requested at (or numerically on) a defect core."""


class PoleError(ScherkError):
    """Cotangent pole: b is an integer multiple of pi."""


class LogBranchPoint(ScherkError):
    pass


class InvalidPair(ScherkError):
    pass


class DerivativeUnavailable(ScherkError):
    pass


class EmptyGrid(ScherkError):
    pass


class NonFiniteEnergy(ScherkError):
    pass


class BadBracket(ScherkError):
    pass


class IoFailure(OSError):
    pass
