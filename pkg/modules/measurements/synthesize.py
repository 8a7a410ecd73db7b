from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional

import numpy as np

from core.errors import TrajectoryError
from modules.fem.schemas import MaterialCoefficients
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.mesh.level import MeshLevel
from modules.multigrid.schemas import SolverSettings
from modules.physics.diffusion import TransientTrajectory, march_diffusion_state, n_time_steps

from .rbf import RbfField, default_eps, fit_rbf, lattice_centers
from .schemas import RbfSettings

logger = logging.getLogger(__name__)


@dataclass
class MeasurementData:
    """Reference states ybar at the measurement steps.

    Either RBF fields evaluated at the current vertex positions, or nodal values
    carried along with the mesh vertices (``nodal``).
    """
    dt: float
    T: float
    fields: Dict[int, RbfField] = field(default_factory=dict)
    nodal: Optional[TransientTrajectory] = None

    @property
    def steps(self) -> list[int]:
        if self.nodal is not None:
            return list(range(1, self.nodal.n_steps + 1))
        return sorted(self.fields)

    def trajectory(self, level: MeshLevel) -> TransientTrajectory:
        N = n_time_steps(self.dt, self.T)
        if self.nodal is not None:
            if self.nodal.values.shape != (N + 1, level.n_vertices):
                raise TrajectoryError("nodal reference data does not match the mesh and time grid")
            return self.nodal
        values = np.zeros((N + 1, level.n_vertices))
        for n, rbf in self.fields.items():
            values[n] = rbf(level.coords)
        return TransientTrajectory(times=self.dt * np.arange(N + 1), values=values)

    def frozen(self, level: MeshLevel) -> "MeasurementData":
        """Nodal copy on ``level`` that moves with the vertices from now on."""
        return MeasurementData(dt=self.dt, T=self.T, nodal=self.trajectory(level))

    def by_time(self) -> Dict[float, RbfField]:
        return {n * self.dt: f for n, f in sorted(self.fields.items())}


def fit_snapshot(level: MeshLevel, values: np.ndarray, settings: RbfSettings) -> RbfField:
    lo, hi = level.coords.min(axis=0), level.coords.max(axis=0)
    centers = lattice_centers(lo, hi, settings.centers_per_axis)
    spacing = float((hi - lo).max()) / max(settings.centers_per_axis - 1, 1)
    eps = settings.eps if settings.eps is not None else default_eps(spacing)
    return fit_rbf(level.coords, values, centers, eps, settings.ridge)


# Run the diffusion model on the target geometry and fit one RBF field per measurement step.
def synthesize_measurements(
    target: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    dt: float,
    T: float,
    steps: Iterable[int],
    rbf: Optional[RbfSettings] = None,
    settings: Optional[SolverSettings] = None,
) -> MeasurementData:
    rbf = rbf or RbfSettings()
    y = march_diffusion_state(target, coeffs, dt, T, settings)
    data = MeasurementData(dt=dt, T=T)
    for n in steps:
        data.fields[int(n)] = fit_snapshot(target.finest, y[int(n)], rbf)
        logger.info("measurement at t=%.4g fitted, rms residual %.3e", n * dt, data.fields[int(n)].rms_residual)
    return data


def exact_measurements(target: SimplicialMeshHierarchy, coeffs: MaterialCoefficients, dt: float, T: float,
                       settings: Optional[SolverSettings] = None) -> MeasurementData:
    """Nodal reference trajectory of ``target`` (same topology as the optimized mesh)."""
    return MeasurementData(dt=dt, T=T, nodal=march_diffusion_state(target, coeffs, dt, T, settings))
