from __future__ import annotations

import logging
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from core.errors import SolverError
from modules.fem.boundary import LinearSystem
from modules.mesh.hierarchy import SimplicialMeshHierarchy

from .pcg import pcg
from .schemas import SolverSettings
from .vcycle import MgHierarchy

logger = logging.getLogger(__name__)


def free_prolongations(mesh: SimplicialMeshHierarchy, fixed: np.ndarray, ncomp: int):
    """Nodal prolongations expanded to ``ncomp`` components and restricted to free dofs."""
    out = []
    eye = sp.identity(ncomp, format="csr")
    for l in range(1, len(mesh)):
        P = sp.kron(mesh.prolongation(l), eye, format="csr")
        nf = mesh.levels[l].n_vertices * ncomp
        nc = mesh.levels[l - 1].n_vertices * ncomp
        free_f, free_c = ~fixed[:nf], ~fixed[:nc]
        out.append(P[free_f][:, free_c].tocsr())
    return out


def build_mg(mesh: SimplicialMeshHierarchy, system: LinearSystem, ncomp: int, settings: SolverSettings) -> MgHierarchy:
    return MgHierarchy.galerkin(
        system.reduced_matrix(),
        free_prolongations(mesh, system.fixed, ncomp),
        settings.pre_sweeps,
        settings.post_sweeps,
    )


class SystemSolver:
    """Repeated solves with one constrained operator on the finest level."""

    def __init__(
        self,
        system: LinearSystem,
        mesh: SimplicialMeshHierarchy,
        ncomp: int,
        settings: Optional[SolverSettings] = None,
    ):
        self.system = system
        self.settings = settings or SolverSettings()
        self.A = system.reduced_matrix()
        self._coupling = system.matrix[system.free][:, system.fixed].tocsr()
        self.iterations: list[int] = []
        if self.settings.method == "direct":
            self._lu = splu(self.A.tocsc())
            self.mg = None
        else:
            self._lu = None
            self.mg = build_mg(mesh, system, ncomp, self.settings)

    def solve_reduced(self, rhs: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            self.iterations.append(0)
            return self._lu.solve(rhs)
        result = pcg(self.A, rhs, self.mg, rtol=self.settings.rtol, maxit=self.settings.maxit)
        if not result.converged:
            raise SolverError(
                f"MG-PCG did not reach rtol={self.settings.rtol:g} in {result.iterations} iterations",
                iterations=result.iterations,
                residual=result.residual,
            )
        logger.debug("MG-PCG converged in %d iterations", result.iterations)
        self.iterations.append(result.iterations)
        return result.x

    def solve(self, load: Optional[np.ndarray] = None, values: Optional[np.ndarray] = None) -> np.ndarray:
        """Full solution for ``load`` with fixed dofs set to ``values`` (default: the system's)."""
        load = self.system.load if load is None else load
        values = self.system.values if values is None else values
        rhs = load[self.system.free] - self._coupling @ values[self.system.fixed]
        x = np.array(values, dtype=float)
        x[self.system.free] = self.solve_reduced(rhs)
        return x
