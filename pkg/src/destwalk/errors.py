"""Exception types raised across the package."""


class WalkError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(WalkError, ValueError):
    pass


class DimensionMismatchError(WalkError, ValueError):
    pass


class AtDestinationError(WalkError, ValueError):
    """The difference vector has zero norm, so no step direction exists."""


class SingularComponentError(WalkError, ArithmeticError):
    """A rotated difference component is too close to zero to divide by.

    Callers recover by drawing a fresh frame.
    """


class InsufficientDataError(WalkError, ValueError):
    pass


class DegenerateSeriesError(WalkError, ValueError):
    """A series has zero variance, so a correlation is undefined."""


class OutOfSupportError(WalkError, ValueError):
    pass


class ConfigError(WalkError, ValueError):
    """Invalid run configuration. ``key`` names the offending field."""

    def __init__(self, key, message):
        super().__init__(message)
        self.key = key


class SimulationAbort(WalkError, RuntimeError):
    def __init__(self, message, replica=None):
        super().__init__(message)
        self.replica = replica
