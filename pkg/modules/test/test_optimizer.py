import numpy as np
import pandas as pd
import pytest

from core.errors import MeshValidityFailure
from modules.fem.schemas import MaterialCoefficients
from modules.optimizer import LbfgsMemory, OptimizerSettings, RegularizationSchedule, ShapeOptimizer
from modules.optimizer.safeguard import local_min_edge, safeguard_scale
from modules.shape_calculus import ObjectiveSpec, ShapeProblem


def euclid(a, b):
    return float(a @ b)


def test_empty_memory_is_steepest_descent(rng):
    g = rng.standard_normal(6)
    np.testing.assert_array_equal(LbfgsMemory(euclid).direction(g), -g)


def test_memory_rejects_negative_curvature(rng):
    memory = LbfgsMemory(euclid)
    s = rng.standard_normal(4)
    assert not memory.store(s, -s)
    assert len(memory) == 0
    assert memory.store(s, 2.0 * s)
    assert len(memory) == 1


def test_memory_keeps_newest_pairs(rng):
    memory = LbfgsMemory(euclid, size=5)
    for _ in range(8):
        s = rng.standard_normal(3)
        memory.store(s, s)
    assert len(memory) == 5
    memory.clear()
    assert len(memory) == 0


def test_two_loop_satisfies_newest_secant_equation(rng):
    G = np.diag([1.0, 2.0, 5.0, 10.0])
    A = np.array([[4.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.5, 0.0], [0.0, 0.5, 2.0, 0.2], [0.0, 0.0, 0.2, 1.0]])
    inner = lambda a, b: float(a @ G @ b)  # noqa: E731
    memory = LbfgsMemory(inner, size=3)
    for _ in range(3):
        s = rng.standard_normal(4)
        # gradient representative in the G inner product
        assert memory.store(s, np.linalg.solve(G, A @ s))
    s_last, y_last, _ = memory.pairs[-1]
    np.testing.assert_allclose(memory.apply(y_last), s_last, rtol=1e-10)
    g = rng.standard_normal(4)
    assert inner(g, memory.direction(g)) < 0


def test_safeguard_zero_field(square_level):
    assert safeguard_scale(np.zeros((square_level.n_vertices, 2)), square_level) == 1.0


def test_safeguard_scales_inversely_with_field(square_level, rng):
    U = rng.standard_normal((square_level.n_vertices, 2))
    s1 = safeguard_scale(U, square_level)
    s2 = safeguard_scale(2.0 * U, square_level)
    assert s2 == pytest.approx(0.5 * s1)
    moved = s1 * np.linalg.norm(U, axis=1)
    assert np.all(moved <= 0.3 * local_min_edge(square_level) * (1 + 1e-9))


def test_safeguard_backtracks_from_large_trial(square_level):
    U = np.zeros((square_level.n_vertices, 2))
    k = int(np.argmin(np.linalg.norm(square_level.coords - 0.5, axis=1)))
    U[k] = [1.0, 0.0]
    s = safeguard_scale(U, square_level, s0=1.0)
    assert s < 1.0
    assert np.log2(1.0 / s) == pytest.approx(round(np.log2(1.0 / s)))
    assert np.all(square_level.signed_volumes(square_level.coords + s * U) > 0)
    with pytest.raises(MeshValidityFailure):
        safeguard_scale(U, square_level, s0=1.0, max_backtracks=0)


def test_schedule_switches_once():
    schedule = RegularizationSchedule(nu4_initial=0.01, switch_iteration=10, nu4_after=0.0)
    assert [schedule.nu4(i) for i in range(10)] == [0.01] * 10
    assert schedule.nu4(10) == 0.0 and schedule.switched
    assert schedule.nu4(3) == 0.0
    scaled = RegularizationSchedule(nu4_initial=1.0, level_scaling=True, base_h=0.2)
    assert scaled.nu4(0, h=0.1) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        RegularizationSchedule(nu4_initial=-1.0)


def geometric_problem(direct, nu4=0.1):
    return ShapeProblem(MaterialCoefficients(), ObjectiveSpec(nu3=1.0, nu4=nu4, perimeter_form="volume"), direct)


def test_gradient_descent_decreases_objective(polygon_mesh, direct, tmp_path):
    settings = OptimizerSettings(max_iter=3, gs_tol=0.0)
    optimizer = ShapeOptimizer(geometric_problem(direct), settings, solver_settings=direct)
    mesh, state = optimizer.run(polygon_mesh, tmp_path)
    history = state.history_frame()
    assert history["iter"].tolist() == [1, 2, 3, 4]
    assert np.all(np.diff(history["J"]) <= 0)
    assert np.all(history["step_scale"].iloc[:-1] > 0)
    assert history["step_scale"].iloc[-1] == 0.0
    assert mesh.check_nesting()
    # outer volume shrinks as the inclusion grows
    assert mesh.finest.outer_volume() < polygon_mesh.finest.outer_volume()
    on_disk = pd.read_csv(tmp_path / "history.csv")
    assert list(on_disk.columns) == list(history.columns)
    assert (tmp_path / "quality.csv").exists() and (tmp_path / "final_mesh.txt").exists()


def test_lbfgs_run_with_regularization_switch(polygon_mesh, direct, tmp_path):
    settings = OptimizerSettings(mode="lbfgs", max_iter=3, gs_tol=0.0, nu4_switch_iteration=2, nu4_after=0.0)
    optimizer = ShapeOptimizer(geometric_problem(direct), settings, solver_settings=direct)
    _, state = optimizer.run(polygon_mesh, tmp_path, vtk_every_iteration=True)
    history = state.history_frame()
    assert history["nu4"].tolist() == [0.1, 0.1, 0.0, 0.0]
    # dropping the perimeter term removes the part of the gradient that balances j3
    assert history["gs_norm"].iloc[2] > 1.2 * history["gs_norm"].iloc[1]
    assert len(state.memory) <= 5
    assert history["J"].iloc[1] <= history["J"].iloc[0]
    assert (tmp_path / "vtk" / "iter_0001.vtk").exists()


def test_converged_run_keeps_mesh(polygon_mesh, direct):
    settings = OptimizerSettings(max_iter=5, gs_tol=1e6)
    mesh, state = ShapeOptimizer(geometric_problem(direct), settings, solver_settings=direct).run(polygon_mesh)
    assert state.converged and state.iteration == 1
    assert mesh is polygon_mesh
    assert state.history[0]["step_scale"] == 0.0


def test_halt_is_recorded(polygon_mesh, direct, tmp_path):
    settings = OptimizerSettings(max_iter=5, gs_tol=0.0, initial_scale=1e6, max_backtracks=0)
    mesh, state = ShapeOptimizer(geometric_problem(direct), settings, solver_settings=direct).run(polygon_mesh, tmp_path)
    assert state.halted is not None
    assert state.history == []
    assert mesh is polygon_mesh
    assert (tmp_path / "history.csv").exists()


def test_settings_validation():
    with pytest.raises(ValueError):
        OptimizerSettings(memory=6)
    with pytest.raises(ValueError):
        OptimizerSettings(mode="newton")
