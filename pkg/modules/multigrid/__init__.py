from .pcg import PcgResult, jacobi, pcg
from .schemas import SolverSettings
from .solve import SystemSolver, build_mg, free_prolongations
from .vcycle import MgHierarchy, SymmetricGaussSeidel

__all__ = [
    "MgHierarchy",
    "PcgResult",
    "SolverSettings",
    "SymmetricGaussSeidel",
    "SystemSolver",
    "build_mg",
    "free_prolongations",
    "jacobi",
    "pcg",
]
