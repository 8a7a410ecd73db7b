from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from modules.fem.assembly import assemble_elasticity
from modules.fem.boundary import LinearSystem, elasticity_bcs
from modules.fem.schemas import MaterialCoefficients
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.multigrid.schemas import SolverSettings
from modules.multigrid.solve import SystemSolver

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ElasticPair:
    """Displacement u and adjoint displacement w, node-major (nv * d,)."""
    u: np.ndarray
    w: np.ndarray
    system: LinearSystem
    iterations: int = 0

    def energy(self, x: Optional[np.ndarray] = None) -> float:
        x = self.u if x is None else x
        return float(x @ (self.system.matrix @ x))


def elastic_system(mesh: SimplicialMeshHierarchy, coeffs: MaterialCoefficients, f_top: Sequence[float]) -> LinearSystem:
    level = mesh.finest
    if len(f_top) != level.dim:
        raise ValueError(f"f_top must have {level.dim} components, got {len(f_top)}")
    return assemble_elasticity(level, coeffs, elasticity_bcs(level.dim, tuple(f_top)))


def solve_elastic_state(
    mesh: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    f_top: Sequence[float],
    settings: Optional[SolverSettings] = None,
    solver: Optional[SystemSolver] = None,
) -> np.ndarray:
    """Clamped bottom, traction f_top on top, free sides."""
    if solver is None:
        solver = SystemSolver(elastic_system(mesh, coeffs, f_top), mesh, mesh.dimension, settings)
    return solver.solve()


def solve_elastic_adjoint(
    mesh: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    f_top: Sequence[float],
    nu1: float,
    settings: Optional[SolverSettings] = None,
    solver: Optional[SystemSolver] = None,
) -> np.ndarray:
    """Same operator as the state with traction -nu1 f, hence w = -nu1 u."""
    if solver is None:
        solver = SystemSolver(elastic_system(mesh, coeffs, f_top), mesh, mesh.dimension, settings)
    system = solver.system
    return solver.solve(-nu1 * system.load, np.zeros_like(system.values))


def solve_elastic_pair(
    mesh: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    f_top: Sequence[float],
    nu1: float,
    settings: Optional[SolverSettings] = None,
) -> ElasticPair:
    system = elastic_system(mesh, coeffs, f_top)
    solver = SystemSolver(system, mesh, mesh.dimension, settings)
    u = solve_elastic_state(mesh, coeffs, f_top, solver=solver)
    w = solve_elastic_adjoint(mesh, coeffs, f_top, nu1, solver=solver)
    logger.debug("elastic state/adjoint solved, PCG iterations %s", solver.iterations)
    return ElasticPair(u=u, w=w, system=system, iterations=max(solver.iterations, default=0))
