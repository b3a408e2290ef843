"""Exact lifted solutions of the complex Monge-Ampere equations and their verification."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ChartMismatchError,
    ConsistencyError,
    DegenerateMetricError,
    DegenerateModeError,
    HeavenliftError,
    LegendreError,
    QuadratureError,
    SingularPointError,
)
from .jets import Jet  # noqa: E402
from .pde import EquationId, ResidualRecord, residual, residual_pair  # noqa: E402
from .solutions import Chart, FieldEvaluator  # noqa: E402

__all__ = [
    "Chart",
    "ChartMismatchError",
    "ConsistencyError",
    "DegenerateMetricError",
    "DegenerateModeError",
    "EquationId",
    "FieldEvaluator",
    "HeavenliftError",
    "Jet",
    "LegendreError",
    "QuadratureError",
    "ResidualRecord",
    "SingularPointError",
    "residual",
    "residual_pair",
]
