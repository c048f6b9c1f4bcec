"""Exception and warning types raised across the package."""


class BubbleFocusError(Exception):
    """Base class for all package errors."""


class InvalidInputError(BubbleFocusError, ValueError):
    pass


class DegenerateConfigurationError(BubbleFocusError, ValueError):
    pass


class PackingError(BubbleFocusError, RuntimeError):
    def __init__(self, message, placed=0, attempts=0):
        super().__init__(message)
        self.placed = placed
        self.attempts = attempts


class SingularEvaluationError(BubbleFocusError, ValueError):
    """Field requested at a point where the kernel is singular."""


class NearFieldError(SingularEvaluationError):
    """Field requested inside a bubble, where the point model does not apply."""


class DomainError(BubbleFocusError, ValueError):
    pass


class SingularSystemError(BubbleFocusError, ArithmeticError):
    def __init__(self, message, pivot=0.0, omega=None):
        super().__init__(message)
        self.pivot = pivot
        self.omega = omega


class AssemblyError(BubbleFocusError, ValueError):
    pass


class InvalidWindowError(BubbleFocusError, ValueError):
    pass


class UnboundedWidthError(BubbleFocusError, ValueError):
    """No half-maximum crossing was found inside the sampled domain."""


class ConfigMismatchError(BubbleFocusError, ValueError):
    pass


class ConfigError(BubbleFocusError, ValueError):
    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class NearSingularWarning(UserWarning):
    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class IllConditionedWarning(UserWarning):
    pass


class MediumRegimeWarning(UserWarning):
    pass
