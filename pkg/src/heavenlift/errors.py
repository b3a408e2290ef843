"""Exception types shared across the package."""


class HeavenliftError(Exception):
    """Base class for all errors raised by heavenlift."""


class SingularPointError(HeavenliftError, ValueError):
    """An expression was evaluated at a singular point or on a branch cut.

    The offending value is kept on ``value`` so reports can show it.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class ChartMismatchError(HeavenliftError, ValueError):
    pass


class DegenerateModeError(HeavenliftError, ValueError):
    pass


class QuadratureError(HeavenliftError, RuntimeError):
    pass


class LegendreError(HeavenliftError, RuntimeError):
    """Newton failure or singular Hessian while inverting a Legendre map."""


class ConsistencyError(HeavenliftError, RuntimeError):
    """An internal cross-check that must never fail did fail."""


class DegenerateMetricError(HeavenliftError, ValueError):
    """det g vanishes (to working precision) at the requested point."""
