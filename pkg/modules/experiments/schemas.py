from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from modules.fem.schemas import MaterialCoefficients
from modules.measurements.schemas import MeasurementConfig
from modules.multigrid.schemas import SolverSettings
from modules.optimizer.schemas import OptimizerSettings
from modules.shape_calculus.schemas import ObjectiveSpec
from modules.steklov.schemas import MetricSettings


# Hold-all box and inclusion shape of the coarse level
class GeometryConfig(BaseModel):
    """Coarse geometry plus the number of levels of the hierarchy."""
    model_config = ConfigDict(extra="forbid")

    kind: Literal["square", "polygon", "star", "lattice", "file"] = "polygon"
    dim: Literal[2, 3] = 2
    extent: List[float] = Field(default_factory=lambda: [1.0, 1.0])
    levels: int = Field(2, ge=1, description="coarse level plus uniform refinements")
    # structured square inclusion
    n: int = Field(8, ge=2, description="cells per axis of the structured box")
    lo: float = 0.25
    hi: float = 0.75
    # polygonal shapes
    center: List[float] = Field(default_factory=lambda: [0.5, 0.5])
    radius: float = Field(0.25, gt=0)
    sides: int = Field(32, ge=3)
    amplitude: float = Field(0.0, ge=0, lt=1)
    lobes: int = Field(5, ge=1)
    lattice: int = Field(2, ge=1)
    h: float = Field(0.08, gt=0, description="background mesh size of polygon geometries")
    snap_interface: bool = Field(False, description="project refined interface vertices onto the circle(s)")
    mesh_file: Optional[str] = None

    @model_validator(mode="after")
    def _consistent(self):
        if len(self.extent) != self.dim:
            raise ValueError(f"extent needs {self.dim} entries")
        if self.dim == 3 and self.kind not in ("square", "file"):
            raise ValueError("3D geometries support kind 'square' or 'file' only")
        if self.kind == "file":
            if not self.mesh_file:
                raise ValueError("kind 'file' needs mesh_file")
            if not Path(self.mesh_file).exists():
                raise ValueError(f"mesh file not found: {self.mesh_file}")
        if self.kind == "square" and not 0 < self.lo < self.hi < min(self.extent):
            raise ValueError("square inclusion must satisfy 0 < lo < hi < extent")
        if self.snap_interface and self.kind not in ("polygon", "lattice"):
            raise ValueError("snap_interface applies to circular polygon or lattice inclusions")
        return self


class MeasurementSourceConfig(MeasurementConfig):
    """Reference data: RBF fits of a target geometry's trajectory, or exact nodal states."""
    target: Optional[GeometryConfig] = Field(None, description="geometry generating the data; default: the initial one")


class OutputConfig(BaseModel):
    dir: str = "runs/default"
    vtk_every_iteration: bool = False


class CheckGradientConfig(BaseModel):
    ts: List[float] = Field(default_factory=lambda: [1e-2, 1e-3, 1e-4])
    fields: int = Field(5, ge=1, description="random admissible directions per component")
    seed: int = 0
    n_jobs: int = 1
    required_order: float = Field(0.9, gt=0)
    j4_form: Literal["surface", "volume"] = "volume"

    @model_validator(mode="after")
    def _ts(self):
        if len(self.ts) < 2 or any(t <= 0 for t in self.ts):
            raise ValueError("need at least two positive step sizes")
        return self


class CurvatureStudyConfig(BaseModel):
    min_levels_for_slope: int = Field(2, ge=2)


class MgBenchConfig(BaseModel):
    problem: Literal["poisson", "diffusion", "elasticity"] = "poisson"
    refinements: List[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    dt: float = Field(1.5, gt=0, description="time step of the diffusion operator M + dt K")

    @model_validator(mode="after")
    def _refinements(self):
        if not self.refinements or any(r < 0 for r in self.refinements):
            raise ValueError("refinements must be a non-empty list of non-negative counts")
        return self


# Full scenario: every section of config/base.yaml, validated before compute
class ScenarioConfig(BaseModel):
    name: str = "default"
    geometry: GeometryConfig = GeometryConfig()
    coefficients: MaterialCoefficients = MaterialCoefficients()
    objective: ObjectiveSpec = ObjectiveSpec()
    optimizer: OptimizerSettings = OptimizerSettings()
    solver: SolverSettings = SolverSettings()
    metric: MetricSettings = MetricSettings()
    measurement: MeasurementSourceConfig = MeasurementSourceConfig()
    output: OutputConfig = OutputConfig()
    check_gradient: CheckGradientConfig = CheckGradientConfig()
    curvature_study: CurvatureStudyConfig = CurvatureStudyConfig()
    mg_bench: MgBenchConfig = MgBenchConfig()

    @model_validator(mode="after")
    def _cross(self):
        if len(self.objective.f_top) != self.geometry.dim:
            raise ValueError(f"objective.f_top needs {self.geometry.dim} components")
        for t in self.objective.measurement_instants:
            n = round(t / self.objective.dt)
            if abs(n * self.objective.dt - t) > 1e-9 * self.objective.T or not 0 < n * self.objective.dt <= self.objective.T + 1e-12:
                raise ValueError(f"measurement instant {t} is not on the time grid")
        target = self.measurement.target
        if target is not None and target.dim != self.geometry.dim:
            raise ValueError("measurement target must have the geometry's dimension")
        return self

    def require_levels(self, n: int) -> None:
        if self.geometry.levels < n:
            raise ValueError(f"this command needs geometry.levels >= {n}, got {self.geometry.levels}")
