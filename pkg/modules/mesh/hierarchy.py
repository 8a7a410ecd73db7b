from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from core.errors import InvalidDeformationError, MeshError

from .level import MeshLevel, RefinementMap
from .refine import refine_uniform

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimplicialMeshHierarchy:
    """Nested refinement levels, coarse to fine.

    Coarse vertex ``i`` is vertex ``i`` on every finer level, so a field on the
    finest level restricts to level ``l`` by taking its first ``n_vertices(l)`` rows.
    """
    levels: Tuple[MeshLevel, ...]

    @classmethod
    def from_coarse(
        cls,
        coarse: MeshLevel,
        n_refinements: int,
        project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "SimplicialMeshHierarchy":
        """Refine ``n_refinements`` times.

        ``project`` maps new interface vertices onto the underlying curve, so a
        sampled smooth shape gets smoother with each level instead of keeping its corners.
        """
        levels: List[MeshLevel] = [coarse]
        for _ in range(n_refinements):
            fine = refine_uniform(levels[-1])
            if project is not None:
                fine = snap_interface(fine, levels[-1].n_vertices, project)
            levels.append(fine)
        logger.info("built %d-level hierarchy: %d vertices, %d simplices on the finest level",
                    len(levels), levels[-1].n_vertices, levels[-1].n_elements)
        return cls(tuple(levels))

    @property
    def dimension(self) -> int:
        return self.levels[0].dim

    @property
    def finest(self) -> MeshLevel:
        return self.levels[-1]

    @property
    def coarsest(self) -> MeshLevel:
        return self.levels[0]

    @property
    def refinement_maps(self) -> Tuple[RefinementMap, ...]:
        return tuple(lvl.provenance for lvl in self.levels[1:])

    def __len__(self) -> int:
        return len(self.levels)

    def prolongation(self, fine_index: int) -> sp.csr_matrix:
        """P1 interpolation from level ``fine_index - 1`` to level ``fine_index``."""
        return prolongation_matrix(self.levels[fine_index].provenance, self.levels[fine_index].n_vertices)

    def prolongations(self) -> List[sp.csr_matrix]:
        return [self.prolongation(i) for i in range(1, len(self.levels))]

    def check_nesting(self) -> bool:
        fine = self.finest.coords
        return all(np.array_equal(lvl.coords, fine[: lvl.n_vertices]) for lvl in self.levels)


def prolongation_matrix(refinement: RefinementMap, n_fine: int) -> sp.csr_matrix:
    nc = refinement.n_coarse
    new = np.arange(nc, n_fine)
    rows = np.concatenate([np.arange(nc), new, new])
    cols = np.concatenate([np.arange(nc), refinement.edge_parents[:, 0], refinement.edge_parents[:, 1]])
    vals = np.concatenate([np.ones(nc), np.full(2 * new.size, 0.5)])
    return sp.coo_matrix((vals, (rows, cols)), shape=(n_fine, nc)).tocsr()


# Move every level by scale*U taken at the nested fine-vertex counterparts.
def deform_all_levels(h: SimplicialMeshHierarchy, U: np.ndarray, scale: float = 1.0) -> SimplicialMeshHierarchy:
    """Return the hierarchy displaced by ``scale * U``.

    Raises InvalidDeformationError if any simplex on any level loses positive
    orientation; the input hierarchy is never modified.
    """
    fine = h.finest
    U = np.asarray(U, dtype=float).reshape(fine.n_vertices, fine.dim)
    step = scale * U
    levels = []
    for idx, lvl in enumerate(h.levels):
        coords = lvl.coords + step[: lvl.n_vertices]
        vol = lvl.signed_volumes(coords)
        bad = np.flatnonzero(vol <= 0)
        if bad.size:
            raise InvalidDeformationError(
                f"deformation inverts {bad.size} simplices on level {idx}", elements=bad[:20]
            )
        levels.append(lvl.with_coords(coords))
    out = SimplicialMeshHierarchy(tuple(levels))
    if not out.check_nesting():
        raise MeshError("vertex nesting lost after deformation")
    return out


def snap_interface(level: MeshLevel, n_old: int, project: Callable[[np.ndarray], np.ndarray]) -> MeshLevel:
    """Move interface vertices numbered ``n_old`` and above to ``project(x)``."""
    verts = level.interface_vertices()
    verts = verts[verts >= n_old]
    coords = level.coords.copy()
    coords[verts] = project(coords[verts])
    bad = np.flatnonzero(level.signed_volumes(coords) <= 0)
    if bad.size:
        raise InvalidDeformationError(f"interface projection inverts {bad.size} simplices", elements=bad[:20])
    return level.with_coords(coords)


def radial_projection(centers, radius: float) -> Callable[[np.ndarray], np.ndarray]:
    """Projection onto the nearest of the circles (spheres) of ``radius`` around ``centers``."""
    c = np.atleast_2d(np.asarray(centers, dtype=float))

    def project(x: np.ndarray) -> np.ndarray:
        nearest = c[np.argmin(np.linalg.norm(x[:, None, :] - c[None], axis=2), axis=1)]
        r = np.linalg.norm(x - nearest, axis=1, keepdims=True)
        return nearest + radius * (x - nearest) / r

    return project
