from .lbfgs import LbfgsMemory
from .loop import HISTORY_COLUMNS, OptimizerState, ShapeOptimizer, StepResult
from .safeguard import local_min_edge, safeguard_scale
from .schedule import RegularizationSchedule
from .schemas import OptimizerSettings

__all__ = [
    "HISTORY_COLUMNS",
    "LbfgsMemory",
    "OptimizerSettings",
    "OptimizerState",
    "RegularizationSchedule",
    "ShapeOptimizer",
    "StepResult",
    "local_min_edge",
    "safeguard_scale",
]
