from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Literal, Optional

import numpy as np
import scipy.sparse as sp

from core.errors import ShapeOptError, TrajectoryError
from modules.fem.assembly import DiffusionSystem, assemble_diffusion
from modules.fem.boundary import diffusion_bcs
from modules.fem.schemas import MaterialCoefficients
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.multigrid.schemas import SolverSettings
from modules.multigrid.solve import SystemSolver

logger = logging.getLogger(__name__)

MeasurementMode = Literal["integral", "instants"]


@dataclass(frozen=True)
class TransientTrajectory:
    """Nodal fields on the uniform grid t_n = n * dt, n = 0..N."""
    times: np.ndarray
    values: np.ndarray

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if self.n_steps else 0.0

    def __getitem__(self, n: int) -> np.ndarray:
        return self.values[n]

    def check_aligned(self, other: "TransientTrajectory") -> None:
        if self.values.shape != other.values.shape or not np.allclose(self.times, other.times):
            raise TrajectoryError(
                f"trajectories differ: {self.values.shape} on [0, {self.times[-1]:g}] vs "
                f"{other.values.shape} on [0, {other.times[-1]:g}]"
            )


def n_time_steps(dt: float, T: float) -> int:
    if dt <= 0 or T <= 0:
        raise ValueError("dt and T must be positive")
    n = int(round(T / dt))
    if n < 1 or abs(n * dt - T) > 1e-9 * T:
        raise ValueError(f"time step {dt:g} does not divide the horizon {T:g}")
    return n


def instant_steps(instants: Iterable[float], dt: float, T: float) -> list[int]:
    """Step indices of the measurement instants (each must lie on the time grid)."""
    steps = []
    for t in instants:
        n = int(round(t / dt))
        if abs(n * dt - t) > 1e-9 * max(T, 1.0) or not 0 < n <= n_time_steps(dt, T):
            raise ValueError(f"measurement instant {t:g} is not a grid time of dt={dt:g}, T={T:g}")
        steps.append(n)
    return steps


def tracking_weights(
    n_steps: int,
    dt: float,
    mode: MeasurementMode = "integral",
    steps: Optional[Iterable[int]] = None,
) -> np.ndarray:
    """Time weights of the tracking term.

    ``integral``: right-endpoint rectangle rule (dt at n = 1..N).
    ``instants``: unit weight at each measurement step.
    """
    w = np.zeros(n_steps + 1)
    if mode == "integral":
        w[1:] = dt
    elif mode == "instants":
        for n in steps or ():
            w[n] += 1.0
    else:
        raise ValueError(f"unknown measurement mode '{mode}'")
    return w


def tracking_value(mass: sp.spmatrix, y: TransientTrajectory, ybar: TransientTrajectory,
                   weights: np.ndarray, nu2: float) -> float:
    y.check_aligned(ybar)
    e = y.values - ybar.values
    per_step = np.einsum("ni,ni->n", e, (mass @ e.T).T)
    return 0.5 * nu2 * float(weights @ per_step)


def diffusion_system(mesh: SimplicialMeshHierarchy, coeffs: MaterialCoefficients) -> DiffusionSystem:
    level = mesh.finest
    return assemble_diffusion(level, coeffs, diffusion_bcs(level.dim, 1.0))


# Backward Euler: (M + dt K) y^{n+1} = M y^n, y = 1 on top, y^0 = 0.
def march_diffusion_state(
    mesh: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    dt: float,
    T: float,
    settings: Optional[SolverSettings] = None,
    sources: Optional[np.ndarray] = None,
    system: Optional[DiffusionSystem] = None,
) -> TransientTrajectory:
    """Full state trajectory; ``sources[n]`` is added to the right-hand side of step n."""
    N = n_time_steps(dt, T)
    system = system or diffusion_system(mesh, coeffs)
    solver = SystemSolver(system.step_system(dt), mesh, 1, settings)
    nv = mesh.finest.n_vertices
    values = np.zeros((N + 1, nv))
    for n in range(1, N + 1):
        rhs = system.mass @ values[n - 1] + dt * system.load
        if sources is not None:
            rhs = rhs + sources[n]
        try:
            values[n] = solver.solve(rhs)
        except ShapeOptError as exc:
            raise type(exc)(f"diffusion state step {n}: {exc}") from exc
    logger.debug("diffusion march: %d steps, PCG iterations %s", N, solver.iterations)
    return TransientTrajectory(times=dt * np.arange(N + 1), values=values)


# Backward in time: (M + dt K) z^n = M z^{n+1} - nu2 w_n M (y^n - ybar^n), z^{N+1} = 0, z = 0 on top.
def march_diffusion_adjoint(
    mesh: SimplicialMeshHierarchy,
    coeffs: MaterialCoefficients,
    dt: float,
    T: float,
    y: TransientTrajectory,
    ybar: TransientTrajectory,
    nu2: float,
    weights: Optional[np.ndarray] = None,
    settings: Optional[SolverSettings] = None,
    system: Optional[DiffusionSystem] = None,
) -> TransientTrajectory:
    """Discrete adjoint of the backward Euler march; ``weights`` default to the integral rule."""
    N = n_time_steps(dt, T)
    y.check_aligned(ybar)
    if y.n_steps != N:
        raise TrajectoryError(f"trajectory has {y.n_steps} steps, the time grid {N}")
    weights = tracking_weights(N, dt) if weights is None else np.asarray(weights, float)
    if weights.shape != (N + 1,):
        raise TrajectoryError(f"expected {N + 1} time weights, got {weights.shape}")

    nv = mesh.finest.n_vertices
    z = np.zeros((N + 1, nv))
    if nu2 == 0.0 or not np.any(weights):
        return TransientTrajectory(times=y.times.copy(), values=z)
    system = system or diffusion_system(mesh, coeffs)
    solver = SystemSolver(system.step_system(dt), mesh, 1, settings)
    zero = np.zeros(nv)
    nxt = zero
    for n in range(N, 0, -1):
        rhs = system.mass @ nxt - nu2 * weights[n] * (system.mass @ (y[n] - ybar[n]))
        try:
            z[n] = solver.solve(rhs, zero)
        except ShapeOptError as exc:
            raise type(exc)(f"diffusion adjoint step {n}: {exc}") from exc
        nxt = z[n]
    return TransientTrajectory(times=y.times.copy(), values=z)
