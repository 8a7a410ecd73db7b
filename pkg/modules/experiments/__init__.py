from .drivers import (
    GradientCheck,
    build_coarse,
    build_hierarchy,
    build_measurements,
    build_problem,
    check_gradient,
    curvature_study,
    log_log_slope,
    mg_bench,
    optimize,
)
from .schemas import GeometryConfig, ScenarioConfig

__all__ = [
    "GeometryConfig",
    "GradientCheck",
    "ScenarioConfig",
    "build_coarse",
    "build_hierarchy",
    "build_measurements",
    "build_problem",
    "check_gradient",
    "curvature_study",
    "log_log_slope",
    "mg_bench",
    "optimize",
]
