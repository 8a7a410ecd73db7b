"""Elasticity-type Steklov-Poincaré metric and the deformation equation a(U, V) = b(V)."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from core.errors import ShapeOptError
from modules.fem.assembly import assemble_elasticity_matrix
from modules.fem.boundary import LinearSystem, apply_sliding_bcs, sliding_bcs
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.multigrid.schemas import SolverSettings
from modules.multigrid.solve import SystemSolver
from modules.shape_calculus.loads import ShapeDerivativeLoad

from .schemas import MetricSettings

logger = logging.getLogger(__name__)


class SteklovMetric:
    """Bilinear form a(., .) of linear elasticity with sliding walls on the finest level."""

    def __init__(
        self,
        mesh: SimplicialMeshHierarchy,
        settings: Optional[MetricSettings] = None,
        solver_settings: Optional[SolverSettings] = None,
    ):
        self.settings = settings or MetricSettings()
        level = mesh.finest
        self.dim = level.dim
        self.settings.require_elliptic(self.dim)
        lam = np.full(level.n_elements, self.settings.lam)
        mu = np.full(level.n_elements, self.settings.mu)
        K = assemble_elasticity_matrix(level, lam, mu)
        self.system: LinearSystem = apply_sliding_bcs(K, np.zeros(K.shape[0]), level, sliding_bcs(self.dim))
        self.solver = SystemSolver(self.system, mesh, self.dim, solver_settings)

    @property
    def size(self) -> int:
        return self.system.matrix.shape[0]

    def inner(self, U1: np.ndarray, U2: np.ndarray) -> float:
        return float(np.ravel(U1) @ (self.system.matrix @ np.ravel(U2)))

    def project(self, U: np.ndarray) -> np.ndarray:
        """Zero the constrained (normal) components."""
        return np.where(self.system.fixed, 0.0, np.ravel(U))

    def solve(self, load: np.ndarray) -> np.ndarray:
        load = np.asarray(load, float).ravel()
        if not np.any(load[self.system.free]):
            return np.zeros(self.size)
        return self.solver.solve(load, np.zeros(self.size))


@dataclass(frozen=True)
class DeformationField:
    """Gradient representation U with its load b and cached energy a(U, U)."""
    values: np.ndarray
    load: np.ndarray
    energy: float
    metric: SteklovMetric

    def as_field(self) -> np.ndarray:
        return self.values.reshape(-1, self.metric.dim)

    def scaled(self, c: float) -> "DeformationField":
        return DeformationField(c * self.values, c * self.load, c * c * self.energy, self.metric)


# Sum the assembled loads and solve the deformation equation with the metric's MG-PCG.
def solve_deformation(
    mesh: SimplicialMeshHierarchy,
    loads: Iterable[ShapeDerivativeLoad],
    metric: Optional[SteklovMetric] = None,
    settings: Optional[MetricSettings] = None,
    solver_settings: Optional[SolverSettings] = None,
) -> DeformationField:
    metric = metric or SteklovMetric(mesh, settings, solver_settings)
    b = np.zeros(metric.size)
    for load in loads:
        if load.values.shape != b.shape:
            raise ValueError(f"load of size {load.values.size} does not match {b.size} metric dofs")
        b += load.values
    try:
        U = metric.solve(b)
    except ShapeOptError as exc:
        raise type(exc)(f"deformation equation: {exc}") from exc
    energy = metric.inner(U, U)
    logger.debug("deformation solved: a(U,U)=%.6e b(U)=%.6e", energy, float(b @ U))
    return DeformationField(values=U, load=b, energy=energy, metric=metric)


def gs_norm(U: DeformationField) -> float:
    return float(np.sqrt(max(U.energy, 0.0)))


def gs_inner(U1: DeformationField, U2: DeformationField) -> float:
    if U1.metric is not U2.metric:
        raise ValueError("fields belong to different metrics")
    return U1.metric.inner(U1.values, U2.values)
