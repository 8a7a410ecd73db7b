from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import BoundaryConditionError
from modules.mesh.level import MeshLevel, face_labels, facet_measures, facet_normals, side_labels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dirichlet:
    value: Union[float, Tuple[float, ...]] = 0.0


@dataclass(frozen=True)
class Neumann:
    """Flux (scalar problems) or traction density (vector problems)."""
    value: Union[float, Tuple[float, ...]] = 0.0


@dataclass(frozen=True)
class SlidingNormal:
    """Displacement component ``component`` fixed to zero, the others free."""
    component: int


Condition = Union[Dirichlet, Neumann, SlidingNormal]


@dataclass(frozen=True)
class BoundaryConditionSet:
    conditions: Dict[str, Condition] = field(default_factory=dict)

    def __getitem__(self, label: str) -> Condition:
        return self.conditions[label]

    def check_covers(self, level: MeshLevel) -> None:
        missing = sorted(set(level.boundary_labels.tolist()) - set(self.conditions))
        if missing:
            raise BoundaryConditionError(f"no boundary condition for labels {missing}")


@dataclass
class LinearSystem:
    """Full operator and load plus the strongly imposed dof values.

    Elimination keeps only free rows and columns; the fixed values enter the
    reduced right-hand side, which keeps the reduced operator symmetric.
    """
    matrix: sp.csr_matrix
    load: np.ndarray
    fixed: np.ndarray
    values: np.ndarray

    @property
    def free(self) -> np.ndarray:
        return ~self.fixed

    def reduced_matrix(self) -> sp.csr_matrix:
        free = self.free
        return self.matrix[free][:, free].tocsr()

    def reduced_rhs(self) -> np.ndarray:
        free = self.free
        lift = self.matrix[free][:, self.fixed] @ self.values[self.fixed]
        return self.load[free] - lift

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        x = self.values.copy()
        x[self.free] = x_free
        return x

    def restrict(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[self.free]


# ---------------------------------------------------------------------------
# Standard condition sets

def elasticity_bcs(dim: int, f_top: Tuple[float, ...]) -> BoundaryConditionSet:
    """Clamped bottom, traction f_top on top, traction-free sides."""
    conds: Dict[str, Condition] = {"bottom": Dirichlet(tuple([0.0] * dim)), "top": Neumann(tuple(f_top))}
    conds.update({s: Neumann(tuple([0.0] * dim)) for s in side_labels(dim)})
    return BoundaryConditionSet(conds)


def diffusion_bcs(dim: int, top_value: float = 1.0) -> BoundaryConditionSet:
    """y = top_value on top, insulated elsewhere."""
    conds: Dict[str, Condition] = {"top": Dirichlet(top_value), "bottom": Neumann(0.0)}
    conds.update({s: Neumann(0.0) for s in side_labels(dim)})
    return BoundaryConditionSet(conds)


def sliding_bcs(dim: int) -> BoundaryConditionSet:
    """Normal displacement fixed on every face of the box."""
    return BoundaryConditionSet({name: SlidingNormal(axis) for (axis, _), name in face_labels(dim).items()})


# ---------------------------------------------------------------------------
# Loads and constraints

def neumann_load(level: MeshLevel, bcs: BoundaryConditionSet, ncomp: int) -> np.ndarray:
    """Facet integrals of the Neumann data against P1 basis functions."""
    d = level.dim
    load = np.zeros((level.n_vertices, ncomp))
    for label, cond in bcs.conditions.items():
        if not isinstance(cond, Neumann):
            continue
        data = np.broadcast_to(np.asarray(cond.value, float), (ncomp,))
        if not np.any(data):
            continue
        facets = level.boundary_facets[level.boundary_labels == label]
        share = facet_measures(level.coords, facets) / d
        for k in range(d):
            np.add.at(load, facets[:, k], share[:, None] * data[None, :])
    return load.ravel()


def dirichlet_dofs(level: MeshLevel, bcs: BoundaryConditionSet, ncomp: int) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed-dof mask and prescribed values for Dirichlet and sliding conditions.

    Dofs are numbered node-major: dof = ncomp * vertex + component.
    """
    bcs.check_covers(level)
    nv = level.n_vertices
    fixed = np.zeros((nv, ncomp), dtype=bool)
    values = np.zeros((nv, ncomp))
    sliding = np.zeros((nv, ncomp), dtype=bool)
    for label, cond in bcs.conditions.items():
        facets = level.boundary_facets[level.boundary_labels == label]
        verts = np.unique(facets)
        if isinstance(cond, Dirichlet):
            fixed[verts] = True
            values[verts] = np.broadcast_to(np.asarray(cond.value, float), (ncomp,))
        elif isinstance(cond, SlidingNormal):
            if ncomp != level.dim:
                raise BoundaryConditionError("sliding conditions need a vector-valued problem")
            normals = facet_normals(level.coords, facets)
            if normals.size and not np.allclose(np.abs(normals[:, cond.component]), 1.0, atol=1e-10):
                raise BoundaryConditionError(
                    f"sliding face '{label}' is not normal to axis {cond.component}; only axis-aligned boxes are supported"
                )
            sliding[verts, cond.component] = True
    conflict = sliding & fixed & (values != 0.0)
    if np.any(conflict):
        raise BoundaryConditionError("nonzero Dirichlet value on a sliding-constrained component")
    fixed |= sliding
    return fixed.ravel(), values.ravel()


def apply_sliding_bcs(op: sp.spmatrix, load: np.ndarray, level: MeshLevel, bcs: BoundaryConditionSet) -> LinearSystem:
    """Constrain the normal component on each sliding face; tangential ones stay free."""
    d = level.dim
    fixed, values = dirichlet_dofs(level, bcs, d)
    return LinearSystem(matrix=sp.csr_matrix(op), load=np.asarray(load, float), fixed=fixed, values=values)
