from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.sparse as sp

from core.errors import ObjectiveError
from modules.fem.assembly import DiffusionSystem
from modules.fem.schemas import MaterialCoefficients
from modules.measurements.synthesize import MeasurementData
from modules.mesh.curvature import discrete_mean_curvature
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.mesh.level import MeshLevel
from modules.multigrid.schemas import SolverSettings
from modules.physics.diffusion import (
    TransientTrajectory,
    diffusion_system,
    instant_steps,
    march_diffusion_adjoint,
    march_diffusion_state,
    n_time_steps,
    tracking_value,
    tracking_weights,
)
from modules.physics.elastic import ElasticPair, solve_elastic_pair

from .loads import (
    ShapeDerivativeLoad,
    assemble_dj1,
    assemble_dj2,
    assemble_dj3,
    assemble_dj4_surface,
    assemble_dj4_volume,
    total_load,
)
from .schemas import ObjectiveSpec

logger = logging.getLogger(__name__)

COMPONENTS = ("j1", "j2", "j3", "j4")


@dataclass(frozen=True)
class ObjectiveValue:
    j1: float = 0.0
    j2: float = 0.0
    j3: float = 0.0
    j4: float = 0.0

    @property
    def J(self) -> float:
        return self.j1 + self.j2 + self.j3 + self.j4

    def as_dict(self) -> Dict[str, float]:
        return {"J": self.J, "j1": self.j1, "j2": self.j2, "j3": self.j3, "j4": self.j4}


@dataclass
class States:
    """Everything solved on one geometry that the loads need."""
    elastic: Optional[ElasticPair] = None
    y: Optional[TransientTrajectory] = None
    ybar: Optional[TransientTrajectory] = None
    z: Optional[TransientTrajectory] = None
    weights: Optional[np.ndarray] = None
    mass: Optional[sp.spmatrix] = None
    extra: Dict[str, object] = field(default_factory=dict)


def eval_objective(
    level: MeshLevel,
    spec: ObjectiveSpec,
    u: Optional[np.ndarray] = None,
    stiffness: Optional[sp.spmatrix] = None,
    y: Optional[TransientTrajectory] = None,
    ybar: Optional[TransientTrajectory] = None,
    mass: Optional[sp.spmatrix] = None,
    weights: Optional[np.ndarray] = None,
) -> ObjectiveValue:
    """Evaluate j1..j4 on the finest level from already solved states."""
    j1 = j2 = 0.0
    if spec.nu1 > 0:
        if u is None or stiffness is None:
            raise ObjectiveError("nu1 > 0 but no elastic state was given")
        j1 = spec.nu1 * float(u @ (stiffness @ u))
    if spec.nu2 > 0:
        if y is None or ybar is None or mass is None:
            raise ObjectiveError("nu2 > 0 but no diffusion state or reference data was given")
        if weights is None:
            weights = tracking_weights(y.n_steps, y.dt)
        j2 = tracking_value(mass, y, ybar, weights, spec.nu2)
    j3 = spec.nu3 * level.outer_volume() if spec.nu3 > 0 else 0.0
    j4 = spec.nu4 * level.interface_measure() if spec.nu4 > 0 else 0.0
    return ObjectiveValue(j1, j2, j3, j4)


class ShapeProblem:
    """Objective J and its assembled derivative loads on a mesh hierarchy."""

    def __init__(
        self,
        coeffs: MaterialCoefficients,
        spec: ObjectiveSpec,
        settings: Optional[SolverSettings] = None,
        measurements: Optional[MeasurementData] = None,
    ):
        self.coeffs = coeffs
        self.spec = spec
        self.settings = settings or SolverSettings()
        self.measurements = measurements
        if spec.nu2 > 0 and measurements is None:
            raise ObjectiveError("nu2 > 0 requires measurement data")

    def with_spec(self, spec: ObjectiveSpec) -> "ShapeProblem":
        return ShapeProblem(self.coeffs, spec, self.settings, self.measurements if spec.nu2 > 0 else None)

    def with_nu4(self, nu4: float) -> "ShapeProblem":
        return self.with_spec(self.spec.model_copy(update={"nu4": nu4}))

    def active(self) -> List[str]:
        return [name for name, nu in self.spec.weights().items() if nu > 0]

    def time_weights(self) -> np.ndarray:
        N = n_time_steps(self.spec.dt, self.spec.T)
        if self.spec.measurement_mode == "integral":
            return tracking_weights(N, self.spec.dt, "integral")
        steps = instant_steps(self.spec.measurement_instants, self.spec.dt, self.spec.T)
        return tracking_weights(N, self.spec.dt, "instants", steps)

    def solve_states(self, mesh: SimplicialMeshHierarchy, adjoint: bool = True) -> States:
        spec = self.spec
        states = States()
        if spec.nu1 > 0:
            states.elastic = solve_elastic_pair(mesh, self.coeffs, spec.f_top, spec.nu1, self.settings)
        if spec.nu2 > 0:
            system: DiffusionSystem = diffusion_system(mesh, self.coeffs)
            states.mass = system.mass
            states.weights = self.time_weights()
            states.y = march_diffusion_state(mesh, self.coeffs, spec.dt, spec.T, self.settings, system=system)
            states.ybar = self.measurements.trajectory(mesh.finest)
            if adjoint:
                states.z = march_diffusion_adjoint(
                    mesh, self.coeffs, spec.dt, spec.T, states.y, states.ybar, spec.nu2,
                    states.weights, self.settings, system=system,
                )
        return states

    def evaluate(self, mesh: SimplicialMeshHierarchy, states: Optional[States] = None) -> ObjectiveValue:
        states = states or self.solve_states(mesh, adjoint=False)
        pair = states.elastic
        return eval_objective(
            mesh.finest,
            self.spec,
            u=pair.u if pair else None,
            stiffness=pair.system.matrix if pair else None,
            y=states.y,
            ybar=states.ybar,
            mass=states.mass,
            weights=states.weights,
        )

    def __call__(self, mesh: SimplicialMeshHierarchy) -> float:
        return self.evaluate(mesh).J

    def loads(self, mesh: SimplicialMeshHierarchy, states: States, restrict: bool = True) -> Dict[str, ShapeDerivativeLoad]:
        level = mesh.finest
        spec = self.spec
        out: Dict[str, ShapeDerivativeLoad] = {}
        if spec.nu1 > 0:
            if states.elastic is None:
                raise ObjectiveError("nu1 > 0 but the elastic pair was not solved")
            out["j1"] = assemble_dj1(states.elastic.u, states.elastic.w, level, self.coeffs, restrict)
        if spec.nu2 > 0:
            if states.z is None:
                raise ObjectiveError("nu2 > 0 but the diffusion adjoint was not solved")
            out["j2"] = assemble_dj2(states.y, states.z, states.ybar, level, self.coeffs,
                                     spec.nu2, states.weights, restrict)
        if spec.nu3 > 0:
            out["j3"] = assemble_dj3(level, spec.nu3, restrict)
        if spec.nu4 > 0:
            if spec.perimeter_form == "surface":
                out["j4"] = assemble_dj4_surface(level, discrete_mean_curvature(level), spec.nu4, restrict)
            else:
                out["j4"] = assemble_dj4_volume(level, spec.nu4, restrict)
        return out

    def gradient(self, mesh: SimplicialMeshHierarchy, restrict: bool = True):
        """Solve states and adjoints once, return (value, combined load, per-component loads)."""
        states = self.solve_states(mesh, adjoint=True)
        value = self.evaluate(mesh, states)
        parts = self.loads(mesh, states, restrict)
        size = mesh.finest.n_vertices * mesh.dimension
        return value, total_load(parts.values(), size), parts
