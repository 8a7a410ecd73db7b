"""Experiment drivers behind the CLI subcommands."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from modules.fem.assembly import assemble_diffusion, assemble_elasticity_matrix, assemble_laplace
from modules.fem.boundary import LinearSystem, apply_sliding_bcs, diffusion_bcs, sliding_bcs
from modules.measurements.synthesize import MeasurementData, exact_measurements, synthesize_measurements
from modules.mesh.curvature import discrete_mean_curvature
from modules.mesh.generators import (
    lattice_polygons,
    polygon_inclusions,
    regular_polygon,
    star_polygon,
    structured_box,
)
from modules.mesh.hierarchy import SimplicialMeshHierarchy, radial_projection
from modules.mesh.io import read_mesh
from modules.mesh.level import MeshLevel
from modules.multigrid.solve import SystemSolver
from modules.optimizer.loop import OptimizerState, ShapeOptimizer
from modules.physics.diffusion import instant_steps
from modules.shape_calculus.fd import TaylorReport, random_admissible_field, taylor_test
from modules.shape_calculus.loads import assemble_dj4_volume
from modules.shape_calculus.objective import ShapeProblem

from .schemas import GeometryConfig, ScenarioConfig

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Builders

def build_coarse(geom: GeometryConfig) -> MeshLevel:
    extent = tuple(geom.extent)
    if geom.kind == "file":
        return read_mesh(geom.mesh_file)
    if geom.kind == "square":
        return structured_box(geom.n, extent, [((geom.lo,) * geom.dim, (geom.hi,) * geom.dim)])
    if geom.kind == "polygon":
        polygons = [regular_polygon(geom.center, geom.radius, geom.sides)]
    elif geom.kind == "star":
        polygons = [star_polygon(geom.center, geom.radius, geom.amplitude, geom.lobes, geom.sides)]
    else:
        polygons = lattice_polygons(geom.lattice, geom.radius, geom.sides, extent)
    return polygon_inclusions(polygons, geom.h, extent)


def interface_projection(geom: GeometryConfig):
    if not geom.snap_interface:
        return None
    if geom.kind == "polygon":
        return radial_projection(geom.center, geom.radius)
    k = geom.lattice
    cx = (np.arange(k) + 0.5) * geom.extent[0] / k
    cy = (np.arange(k) + 0.5) * geom.extent[1] / k
    return radial_projection([(x, y) for y in cy for x in cx], geom.radius)


def build_hierarchy(geom: GeometryConfig, levels: Optional[int] = None) -> SimplicialMeshHierarchy:
    n = geom.levels if levels is None else levels
    return SimplicialMeshHierarchy.from_coarse(build_coarse(geom), n - 1, interface_projection(geom))


def measurement_steps(cfg: ScenarioConfig) -> List[int]:
    obj = cfg.objective
    instants = cfg.measurement.instants or obj.measurement_instants
    return instant_steps(instants, obj.dt, obj.T)


def build_measurements(cfg: ScenarioConfig, mesh: SimplicialMeshHierarchy) -> Optional[MeasurementData]:
    obj = cfg.objective
    if obj.nu2 == 0:
        return None
    target_cfg = cfg.measurement.target
    if cfg.measurement.source == "exact":
        # nodal data needs the optimized mesh's topology
        return exact_measurements(mesh, cfg.coefficients, obj.dt, obj.T, cfg.solver)
    target = mesh if target_cfg is None else build_hierarchy(target_cfg)
    steps = list(range(1, round(obj.T / obj.dt) + 1)) if obj.measurement_mode == "integral" else measurement_steps(cfg)
    return synthesize_measurements(target, cfg.coefficients, obj.dt, obj.T, steps, cfg.measurement.rbf, cfg.solver)


def build_problem(cfg: ScenarioConfig, mesh: SimplicialMeshHierarchy) -> ShapeProblem:
    spec = cfg.objective
    if cfg.measurement.instants and not spec.instants:
        spec = spec.model_copy(update={"instants": list(cfg.measurement.instants)})
    return ShapeProblem(cfg.coefficients, spec, cfg.solver, build_measurements(cfg, mesh))


# ---------------------------------------------------------------------------
# check-gradient

@dataclass(frozen=True)
class GradientCheck:
    table: pd.DataFrame
    passed: bool


def check_gradient(cfg: ScenarioConfig, load_scale: float = 1.0) -> GradientCheck:
    """Assembled b(V) against finite differences for every active component.

    ``load_scale`` multiplies the assembled loads; anything but 1 must fail.
    """
    cfg.require_levels(2)
    gc = cfg.check_gradient
    mesh = build_hierarchy(cfg.geometry)
    problem = build_problem(cfg, mesh)
    if problem.measurements is not None:
        problem.measurements = problem.measurements.frozen(mesh.finest)
    problem = problem.with_spec(problem.spec.model_copy(update={"perimeter_form": gc.j4_form}))
    rng = np.random.default_rng(gc.seed)
    fields = [random_admissible_field(mesh.finest, rng) for _ in range(gc.fields)]

    rows = []
    passed = True
    for name in problem.active():
        single = problem.with_spec(problem.spec.only(name))
        value, load, _ = single.gradient(mesh)
        for k, V in enumerate(fields):
            b = load_scale * load(V)
            report: TaylorReport = taylor_test(single, mesh, V, b, gc.ts, gc.n_jobs, base=value.J)
            ok = report.passed(gc.required_order)
            passed &= ok
            for i, t in enumerate(report.ts):
                rows.append({
                    "component": name, "field": k, "t": t, "fd": report.fd[i], "assembled": b,
                    "error": report.errors[i], "order": report.orders[i - 1] if i else np.nan, "passed": ok,
                })
            logger.info("%s field %d: b(V)=%.6e min order %.3f %s", name, k, b, report.min_order,
                        "ok" if ok else "FAILED")
    if not rows:
        logger.info("no active objective component; nothing to check")
    return GradientCheck(pd.DataFrame(rows), passed)


# ---------------------------------------------------------------------------
# optimize

def optimize(cfg: ScenarioConfig, output_dir: Optional[Path] = None) -> Tuple[SimplicialMeshHierarchy, OptimizerState]:
    cfg.require_levels(2)
    mesh = build_hierarchy(cfg.geometry)
    problem = build_problem(cfg, mesh)
    optimizer = ShapeOptimizer(problem, cfg.optimizer, cfg.metric, cfg.solver)
    if cfg.optimizer.nu4_level_scaling and cfg.optimizer.nu4_base_h is None:
        optimizer.schedule.base_h = mesh.levels[0].h
    out = Path(output_dir or cfg.output.dir)
    return optimizer.run(mesh, out, cfg.output.vtk_every_iteration)


# ---------------------------------------------------------------------------
# curvature-study

def log_log_slope(h: np.ndarray, values: np.ndarray) -> Optional[float]:
    if len(h) < 2:
        return None
    return float(np.polyfit(np.log(h), np.log(values), 1)[0])


def curvature_study(cfg: ScenarioConfig) -> Tuple[pd.DataFrame, Optional[float]]:
    """max |kappa| of the interface on each refinement level and its log-log slope in h."""
    mesh = build_hierarchy(cfg.geometry)
    rows = []
    for l, level in enumerate(mesh.levels):
        kappa = discrete_mean_curvature(level)
        rows.append({"level": l, "h": level.h, "n_elements": level.n_elements, "max_kappa": kappa.max_abs()})
        logger.info("level %d: h=%.4e max|kappa|=%.6e", l, level.h, rows[-1]["max_kappa"])
    table = pd.DataFrame(rows)
    slope = None
    if len(table) >= cfg.curvature_study.min_levels_for_slope:
        slope = log_log_slope(table["h"].to_numpy(), table["max_kappa"].to_numpy())
    return table, slope


# ---------------------------------------------------------------------------
# mg-bench

def bench_system(problem: str, mesh: SimplicialMeshHierarchy, cfg: ScenarioConfig) -> Tuple[LinearSystem, int]:
    level = mesh.finest
    if problem == "poisson":
        system = assemble_diffusion(level, cfg.coefficients, diffusion_bcs(level.dim, 1.0))
        K = assemble_laplace(level)
        return LinearSystem(K, np.zeros(level.n_vertices), system.fixed, system.values), 1
    if problem == "diffusion":
        system = assemble_diffusion(level, cfg.coefficients, diffusion_bcs(level.dim, 1.0))
        return system.step_system(cfg.mg_bench.dt), 1
    n = level.n_elements
    K = assemble_elasticity_matrix(level, np.full(n, cfg.metric.lam), np.full(n, cfg.metric.mu))
    if level.interface_facets.size:
        load = assemble_dj4_volume(level, 1.0, restrict=False).values
    else:
        load = np.ones(K.shape[0])
    return apply_sliding_bcs(K, load, level, sliding_bcs(level.dim)), level.dim


def mg_bench(cfg: ScenarioConfig) -> pd.DataFrame:
    """PCG iteration counts of one model problem over increasingly refined hierarchies."""
    bench = cfg.mg_bench
    coarse = build_coarse(cfg.geometry)
    rows = []
    for r in sorted(bench.refinements):
        mesh = SimplicialMeshHierarchy.from_coarse(coarse, r, interface_projection(cfg.geometry))
        system, ncomp = bench_system(bench.problem, mesh, cfg)
        settings = cfg.solver if len(mesh) > 1 else cfg.solver.model_copy(update={"method": "direct"})
        solver = SystemSolver(system, mesh, ncomp, settings)
        solver.solve()
        rows.append({
            "level": r, "dofs": int(system.free.sum()), "method": settings.method,
            "iterations": solver.iterations[-1],
        })
        logger.info("%s level %d: %d dofs, %d iterations (%s)", bench.problem, r, rows[-1]["dofs"],
                    rows[-1]["iterations"], settings.method)
    return pd.DataFrame(rows)
