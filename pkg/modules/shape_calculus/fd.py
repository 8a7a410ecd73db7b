"""Perturbation-of-identity finite differences used to validate assembled loads."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from core.errors import InvalidDeformationError
from modules.mesh.hierarchy import SimplicialMeshHierarchy, deform_all_levels
from modules.mesh.level import MeshLevel

from .loads import active_dofs

logger = logging.getLogger(__name__)

Evaluator = Callable[[SimplicialMeshHierarchy], float]

MAX_HALVINGS = 20


def fd_directional_derivative(
    evaluate: Evaluator,
    mesh: SimplicialMeshHierarchy,
    V: np.ndarray,
    t: float,
    base: Optional[float] = None,
) -> float:
    """(J(mesh + tV) - J(mesh)) / t with all levels deformed and states re-solved.

    Raises InvalidDeformationError if tV inverts a simplex; callers halve t.
    """
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    if not np.any(V):
        return 0.0
    deformed = deform_all_levels(mesh, V, t)
    j0 = evaluate(mesh) if base is None else base
    return (evaluate(deformed) - j0) / t


def _fd_halving(evaluate: Evaluator, mesh: SimplicialMeshHierarchy, V: np.ndarray, t: float, base: float):
    for _ in range(MAX_HALVINGS):
        try:
            return t, fd_directional_derivative(evaluate, mesh, V, t, base)
        except InvalidDeformationError:
            logger.debug("t=%.3e inverts simplices, halving", t)
            t *= 0.5
    raise InvalidDeformationError(f"no valid step found after {MAX_HALVINGS} halvings")


@dataclass(frozen=True)
class TaylorReport:
    """FD values and errors against an assembled directional derivative."""
    ts: np.ndarray
    fd: np.ndarray
    assembled: float
    errors: np.ndarray
    orders: np.ndarray
    tolerance: float

    @property
    def exact(self) -> bool:
        """All errors at rounding level, where observed orders carry no information."""
        return bool(np.all(self.errors <= self.tolerance))

    @property
    def min_order(self) -> float:
        if self.exact or self.orders.size == 0:
            return float("inf")
        return float(np.nanmin(self.orders))

    def passed(self, required: float = 0.9) -> bool:
        return self.exact or self.min_order >= required


def taylor_test(
    evaluate: Evaluator,
    mesh: SimplicialMeshHierarchy,
    V: np.ndarray,
    assembled: float,
    ts: Sequence[float] = (1e-2, 1e-3, 1e-4),
    n_jobs: int = 1,
    base: Optional[float] = None,
) -> TaylorReport:
    """Compare FD quotients over decreasing t to ``assembled`` = b(V)."""
    j0 = evaluate(mesh) if base is None else base
    runs = Parallel(n_jobs=n_jobs)(delayed(_fd_halving)(evaluate, mesh, V, float(t), j0) for t in ts)
    t_used = np.array([r[0] for r in runs])
    fd = np.array([r[1] for r in runs])
    errors = np.abs(fd - assembled)
    # rounding floor of a difference quotient of J
    tolerance = 1e-12 * max(abs(j0), 1.0) / t_used.min() + 1e-12 * abs(assembled)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log(errors[:-1] / errors[1:]) / np.log(t_used[:-1] / t_used[1:])
    orders = np.where(errors[1:] <= tolerance, np.nan, orders)
    report = TaylorReport(t_used, fd, assembled, errors, orders, tolerance)
    logger.debug("taylor test: b(V)=%.6e fd=%s errors=%s", assembled, fd, errors)
    return report


def random_admissible_field(level: MeshLevel, rng: np.random.Generator, amplitude: Optional[float] = None) -> np.ndarray:
    """Random field on the load-carrying dofs, zero on the box boundary.

    ``amplitude`` defaults to the shortest edge so that t <= 0.1 keeps simplices valid.
    """
    d = level.dim
    mask = active_dofs(level).reshape(-1, d).copy()
    for label in np.unique(level.boundary_labels):
        mask[level.boundary_vertices(label)] = False
    scale = amplitude if amplitude is not None else float(level.edge_lengths().min())
    V = rng.uniform(-1.0, 1.0, size=mask.shape) * scale
    return np.where(mask, V, 0.0)
