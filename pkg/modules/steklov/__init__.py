from .metric import DeformationField, SteklovMetric, gs_inner, gs_norm, solve_deformation
from .schemas import MetricSettings

__all__ = [
    "DeformationField",
    "MetricSettings",
    "SteklovMetric",
    "gs_inner",
    "gs_norm",
    "solve_deformation",
]
