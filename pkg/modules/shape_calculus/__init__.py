from .fd import TaylorReport, fd_directional_derivative, random_admissible_field, taylor_test
from .loads import (
    ShapeDerivativeLoad,
    active_dofs,
    assemble_dj1,
    assemble_dj2,
    assemble_dj3,
    assemble_dj4_surface,
    assemble_dj4_volume,
    interface_support,
    total_load,
)
from .objective import COMPONENTS, ObjectiveValue, ShapeProblem, States, eval_objective
from .schemas import ObjectiveSpec

__all__ = [
    "COMPONENTS",
    "ObjectiveSpec",
    "ObjectiveValue",
    "ShapeDerivativeLoad",
    "ShapeProblem",
    "States",
    "TaylorReport",
    "active_dofs",
    "assemble_dj1",
    "assemble_dj2",
    "assemble_dj3",
    "assemble_dj4_surface",
    "assemble_dj4_volume",
    "eval_objective",
    "fd_directional_derivative",
    "interface_support",
    "random_admissible_field",
    "taylor_test",
    "total_load",
]
