"""Outer optimization loop: states and adjoints, deformation equation, mesh update."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.errors import InvalidDeformationError, MeshValidityFailure
from modules.mesh.curvature import discrete_mean_curvature
from modules.mesh.hierarchy import SimplicialMeshHierarchy, deform_all_levels
from modules.mesh.io import write_mesh, write_vtk
from modules.mesh.quality import mesh_quality
from modules.multigrid.schemas import SolverSettings
from modules.shape_calculus.objective import ObjectiveValue, ShapeProblem
from modules.steklov.metric import DeformationField, SteklovMetric, gs_norm, solve_deformation
from modules.steklov.schemas import MetricSettings

from .lbfgs import LbfgsMemory
from .safeguard import safeguard_scale
from .schedule import RegularizationSchedule
from .schemas import OptimizerSettings

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["iter", "J", "j1", "j2", "j3", "j4", "gs_norm", "nu4", "step_scale"]


@dataclass
class OptimizerState:
    """Iteration counter, quasi-Newton memory and per-iteration records."""
    mode: str = "gradient_descent"
    iteration: int = 0
    memory: Optional[LbfgsMemory] = None
    history: List[Dict[str, float]] = field(default_factory=list)
    quality: List[Dict[str, float]] = field(default_factory=list)
    prev_gradient: Optional[np.ndarray] = None
    prev_step: Optional[np.ndarray] = None
    prev_nu4: Optional[float] = None
    initial_gs: Optional[float] = None
    converged: bool = False
    halted: Optional[str] = None

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history, columns=HISTORY_COLUMNS)

    def quality_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.quality)


@dataclass(frozen=True)
class StepResult:
    value: ObjectiveValue
    gradient: DeformationField
    nu4: float
    scale: float


class ShapeOptimizer:
    """Gradient descent or L-BFGS in the Steklov-Poincaré metric."""

    def __init__(
        self,
        problem: ShapeProblem,
        settings: Optional[OptimizerSettings] = None,
        metric_settings: Optional[MetricSettings] = None,
        solver_settings: Optional[SolverSettings] = None,
        schedule: Optional[RegularizationSchedule] = None,
    ):
        self.problem = problem
        self.settings = settings or OptimizerSettings()
        self.metric_settings = metric_settings or MetricSettings()
        self.solver_settings = solver_settings or problem.settings
        self.schedule = schedule or RegularizationSchedule(
            nu4_initial=problem.spec.nu4,
            switch_iteration=self.settings.nu4_switch_iteration,
            nu4_after=self.settings.nu4_after,
            level_scaling=self.settings.nu4_level_scaling,
            base_h=self.settings.nu4_base_h,
        )

    def new_state(self) -> OptimizerState:
        return OptimizerState(mode=self.settings.mode)

    def gradient(self, mesh: SimplicialMeshHierarchy, problem: ShapeProblem) -> Tuple[ObjectiveValue, DeformationField]:
        value, load, _ = problem.gradient(mesh)
        metric = SteklovMetric(mesh, self.metric_settings, self.solver_settings)
        return value, solve_deformation(mesh, [load], metric)

    def _direction(self, state: OptimizerState, U: DeformationField) -> np.ndarray:
        if state.mode != "lbfgs" or state.memory is None:
            return -U.values
        d = state.memory.direction(U.values)
        if float(U.load @ d) >= 0.0:
            logger.warning("L-BFGS direction is not a descent direction, memory cleared")
            state.memory.clear()
            d = -U.values
        return U.metric.project(d)

    def _line_search(
        self,
        mesh: SimplicialMeshHierarchy,
        problem: ShapeProblem,
        J0: float,
        slope: float,
        d: np.ndarray,
        s0: Optional[float],
    ) -> Tuple[float, SimplicialMeshHierarchy]:
        cfg = self.settings
        s = safeguard_scale(d, mesh.finest, s0=s0, beta=cfg.backtrack, gamma=cfg.max_displacement,
                            max_backtracks=cfg.max_backtracks)
        for k in range(cfg.max_backtracks + 1):
            try:
                trial = deform_all_levels(mesh, d, s)
            except InvalidDeformationError as exc:
                logger.debug("scale %.3e rejected: %s", s, exc)
                s *= cfg.backtrack
                continue
            if not cfg.armijo:
                return s, trial
            J = problem(trial)
            if J <= J0 + cfg.armijo_c * s * slope:
                logger.debug("Armijo accepted scale %.3e after %d reductions (J %.10e -> %.10e)", s, k, J0, J)
                return s, trial
            logger.debug("Armijo rejected scale %.3e: J=%.10e", s, J)
            s *= cfg.backtrack
        raise MeshValidityFailure(f"no admissible step after {cfg.max_backtracks} reductions")

    def step(self, state: OptimizerState, mesh: SimplicialMeshHierarchy) -> Tuple[OptimizerState, SimplicialMeshHierarchy, StepResult]:
        """One loop iteration: evaluate, represent the gradient, move the mesh.

        Appends the history row of the geometry the step starts from.
        """
        cfg = self.settings
        nu4 = self.schedule.nu4(state.iteration, mesh.finest.h)
        problem = self.problem.with_nu4(nu4)
        value, U = self.gradient(mesh, problem)
        gs = gs_norm(U)
        if state.initial_gs is None:
            state.initial_gs = gs

        if state.mode == "lbfgs":
            if state.memory is None:
                state.memory = LbfgsMemory(U.metric.inner, cfg.memory)
            state.memory.inner = U.metric.inner
            if state.prev_nu4 is not None and state.prev_nu4 != nu4:
                state.memory.clear()
            elif state.prev_step is not None and state.prev_gradient is not None:
                state.memory.store(state.prev_step, U.values - state.prev_gradient)

        done = gs <= cfg.gs_tol or (cfg.gs_rtol > 0 and gs <= cfg.gs_rtol * state.initial_gs)
        scale = 0.0
        new_mesh = mesh
        if done:
            state.converged = True
        else:
            d = self._direction(state, U)
            slope = float(U.load @ d)
            s0 = cfg.initial_scale
            if s0 is None and state.memory is not None and len(state.memory):
                s0 = 1.0
            scale, new_mesh = self._line_search(mesh, problem, value.J, slope, d, s0)
            state.prev_step = scale * d
            state.prev_gradient = U.values.copy()
        state.prev_nu4 = nu4

        state.iteration += 1
        row = {"iter": state.iteration, **value.as_dict(), "gs_norm": gs, "nu4": nu4, "step_scale": scale}
        state.history.append(row)
        state.quality.append({"iter": state.iteration, **mesh_quality(mesh.finest).as_row()})
        logger.info("iter %d: J=%.10e gs_norm=%.4e nu4=%.4g scale=%.4e", state.iteration, value.J, gs, nu4, scale)
        return state, new_mesh, StepResult(value, U, nu4, scale)

    def run(
        self,
        mesh: SimplicialMeshHierarchy,
        output_dir: Optional[Path] = None,
        vtk_every_iteration: bool = False,
    ) -> Tuple[SimplicialMeshHierarchy, OptimizerState]:
        """Iterate until converged, ``max_iter`` steps, or a mesh-validity failure."""
        state = self.new_state()
        out = Path(output_dir) if output_dir is not None else None
        for _ in range(self.settings.max_iter + 1):
            last = state.iteration == self.settings.max_iter
            try:
                if last:
                    self._final_row(state, mesh)
                    break
                state, new_mesh, result = self.step(state, mesh)
            except MeshValidityFailure as exc:
                state.halted = str(exc)
                logger.warning("optimization halted at iteration %d: %s", state.iteration + 1, exc)
                break
            if out is not None and vtk_every_iteration:
                self._write_vtk(out / "vtk" / f"iter_{state.iteration:04d}.vtk", mesh, result.gradient)
            mesh = new_mesh
            if state.converged:
                logger.info("converged: gs_norm %.4e after %d iterations", state.history[-1]["gs_norm"], state.iteration)
                break
        if out is not None:
            self.write_outputs(out, state, mesh)
        return mesh, state

    def _final_row(self, state: OptimizerState, mesh: SimplicialMeshHierarchy) -> None:
        # geometry after the last allowed step: record it without moving
        nu4 = self.schedule.nu4(state.iteration, mesh.finest.h)
        problem = self.problem.with_nu4(nu4)
        value, U = self.gradient(mesh, problem)
        state.iteration += 1
        state.history.append({"iter": state.iteration, **value.as_dict(), "gs_norm": gs_norm(U),
                              "nu4": nu4, "step_scale": 0.0})
        state.quality.append({"iter": state.iteration, **mesh_quality(mesh.finest).as_row()})

    @staticmethod
    def _write_vtk(path: Path, mesh: SimplicialMeshHierarchy, U: DeformationField) -> None:
        level = mesh.finest
        point_data = {"deformation": U.as_field()}
        if level.interface_facets.size:
            point_data["curvature"] = discrete_mean_curvature(level).at(level.n_vertices)
        write_vtk(level, path, point_data)

    @staticmethod
    def write_outputs(out: Path, state: OptimizerState, mesh: SimplicialMeshHierarchy) -> None:
        out.mkdir(parents=True, exist_ok=True)
        state.history_frame().to_csv(out / "history.csv", index=False, float_format="%.17g")
        state.quality_frame().to_csv(out / "quality.csv", index=False, float_format="%.17g")
        write_mesh(mesh.finest, out / "final_mesh.txt")
        logger.info("wrote history, quality and final mesh to %s", out)
