"""Exception and warning types raised across the package."""


class OvercollError(Exception):
    """Base class for package errors."""


class CornerParameter(OvercollError, ValueError):
    pass


class InsufficientResolution(OvercollError, ValueError):
    pass


class IndexOutOfLambda(OvercollError, IndexError):
    pass


class CoincidentPoints(OvercollError, ValueError):
    pass


class QuadratureNotConverged(OvercollError, RuntimeError):
    def __init__(self, msg, location=None):
        super().__init__(msg)
        self.location = location


class PointTooCloseToBoundary(OvercollError, ValueError):
    pass


class LengthMismatch(OvercollError, ValueError):
    pass


class DegenerateGrid(OvercollError, ValueError):
    pass


class RankDeficient(OvercollError, ArithmeticError):
    def __init__(self, msg, rank=None):
        super().__init__(msg)
        self.rank = rank


class SingularSystem(OvercollError, ArithmeticError):
    pass


class NearResonantMode(OvercollError, ArithmeticError):
    def __init__(self, msg, mode=None):
        super().__init__(msg)
        self.mode = mode


class SourceOutside(OvercollError, ValueError):
    pass


class InsufficientPoints(OvercollError, ValueError):
    pass


class ConfigError(OvercollError, ValueError):
    pass


class ConditionWarning(UserWarning):
    """Solve succeeded but the system is badly conditioned."""


class IllConditionedWarning(UserWarning):
    """A projection system has a large condition number; results may be inaccurate."""


class IoError(OvercollError, OSError):
    pass
