import numpy as np
import pytest
from pydantic import ValidationError

from modules.mesh.generators import square_inclusion
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.shape_calculus import ShapeDerivativeLoad, assemble_dj3, assemble_dj4_volume
from modules.steklov import MetricSettings, SteklovMetric, gs_inner, gs_norm, solve_deformation


@pytest.fixture
def metric(polygon_mesh, direct):
    return SteklovMetric(polygon_mesh, MetricSettings(), direct)


def test_zero_load_gives_zero_field(polygon_mesh, metric):
    zero = ShapeDerivativeLoad(np.zeros(metric.size), frozenset({"j3"}))
    U = solve_deformation(polygon_mesh, [zero], metric)
    assert not np.any(U.values)
    assert gs_norm(U) == 0.0


def test_linear_in_the_load(polygon_mesh, metric):
    level = polygon_mesh.finest
    b3, b4 = assemble_dj3(level, 1.0), assemble_dj4_volume(level, 1.0)
    U3 = solve_deformation(polygon_mesh, [b3], metric)
    U4 = solve_deformation(polygon_mesh, [b4], metric)
    both = solve_deformation(polygon_mesh, [b3, b4], metric)
    np.testing.assert_allclose(both.values, U3.values + U4.values, atol=1e-12)
    np.testing.assert_allclose(U3.scaled(2.0).values, 2.0 * U3.values)
    assert U3.scaled(2.0).energy == pytest.approx(4.0 * U3.energy)


def test_energy_equals_load_work(polygon_mesh, metric):
    U = solve_deformation(polygon_mesh, [assemble_dj3(polygon_mesh.finest, 1.0)], metric)
    assert U.energy == pytest.approx(U.load @ U.values, rel=1e-10)
    assert gs_norm(U) == pytest.approx(np.sqrt(U.energy))


def test_sliding_walls(polygon_mesh, metric):
    U = solve_deformation(polygon_mesh, [assemble_dj3(polygon_mesh.finest, 1.0)], metric)
    field = U.as_field()
    level = polygon_mesh.finest
    np.testing.assert_allclose(field[level.boundary_vertices("left"), 0], 0.0)
    np.testing.assert_allclose(field[level.boundary_vertices("top"), 1], 0.0)
    np.testing.assert_array_equal(metric.project(U.values), U.values)


def test_inner_product_is_symmetric_and_bounded(polygon_mesh, metric):
    level = polygon_mesh.finest
    U1 = solve_deformation(polygon_mesh, [assemble_dj3(level, 1.0)], metric)
    U2 = solve_deformation(polygon_mesh, [assemble_dj4_volume(level, 1.0)], metric)
    a12, a21 = gs_inner(U1, U2), gs_inner(U2, U1)
    assert a12 == pytest.approx(a21, rel=1e-12)
    assert abs(a12) <= gs_norm(U1) * gs_norm(U2) * (1 + 1e-12)
    # a(U1, U2) = b2(U1)
    assert a12 == pytest.approx(U2.load @ U1.values, rel=1e-9)


def test_fields_of_different_metrics_do_not_mix(polygon_mesh, direct, metric):
    other = SteklovMetric(polygon_mesh, MetricSettings(lam=0.0, mu=1.0), direct)
    b = assemble_dj3(polygon_mesh.finest, 1.0)
    with pytest.raises(ValueError):
        gs_inner(solve_deformation(polygon_mesh, [b], metric), solve_deformation(polygon_mesh, [b], other))


def test_load_size_checked(polygon_mesh, metric):
    with pytest.raises(ValueError):
        solve_deformation(polygon_mesh, [ShapeDerivativeLoad(np.ones(3), frozenset({"j3"}))], metric)


def test_metric_settings_validation():
    with pytest.raises(ValidationError):
        MetricSettings(lam=-1.0, mu=0.1)
    with pytest.raises(ValidationError):
        MetricSettings(mu=0.0)


def test_metric_accepts_planar_lame_pair(polygon_mesh, direct, cube_level):
    settings = MetricSettings(lam=-0.08, mu=0.1)
    metric = SteklovMetric(polygon_mesh, settings, direct)
    U = solve_deformation(polygon_mesh, [assemble_dj3(polygon_mesh.finest, 1.0)], metric)
    assert gs_norm(U) > 0
    with pytest.raises(ValueError):
        SteklovMetric(SimplicialMeshHierarchy.from_coarse(cube_level, 0), settings, direct)


def test_constrained_metric_is_coercive(direct):
    mesh = SimplicialMeshHierarchy.from_coarse(square_inclusion(4), 0)
    metric = SteklovMetric(mesh, MetricSettings(), direct)
    eig = np.linalg.eigvalsh(metric.system.reduced_matrix().toarray())
    assert eig.min() > 1e-8


def test_deformation_in_3d(cube_level, direct):
    mesh = SimplicialMeshHierarchy.from_coarse(cube_level, 0)
    U = solve_deformation(mesh, [assemble_dj4_volume(cube_level, 1.0)], settings=MetricSettings(), solver_settings=direct)
    assert U.as_field().shape == (cube_level.n_vertices, 3)
    assert U.energy > 0
    assert U.energy == pytest.approx(U.load @ U.values, rel=1e-10)
