import numpy as np
import pytest

from core.errors import InvalidDeformationError, MeshError
from modules.mesh.curvature import discrete_mean_curvature
from modules.mesh.generators import (
    polygon_inclusions,
    reference_triangle,
    regular_polygon,
    star_polygon,
    structured_box,
)
from modules.mesh.hierarchy import SimplicialMeshHierarchy, deform_all_levels, radial_projection
from modules.mesh.io import read_mesh, write_mesh, write_vtk
from modules.mesh.quality import aspect_ratios, mesh_quality
from modules.mesh.refine import refine_uniform


def test_reference_triangle_aspect_ratio():
    ratio = aspect_ratios(reference_triangle())
    assert ratio[0] == pytest.approx((1.0 + np.sqrt(2.0)) / 2.0, rel=1e-12)


def test_aspect_ratios_at_least_one(polygon_mesh):
    summary = mesh_quality(polygon_mesh.finest)
    assert summary.min >= 1.0 - 1e-12
    assert summary.degenerate == []


def test_refinement_counts_and_volumes(square_level):
    fine = refine_uniform(square_level)
    assert fine.n_elements == 4 * square_level.n_elements
    assert fine.n_vertices == square_level.n_vertices + len(square_level.edges())
    assert len(fine.interface_facets) == 2 * len(square_level.interface_facets)
    assert fine.outer_volume() == pytest.approx(0.75, abs=1e-14)
    assert fine.interface_measure() == pytest.approx(2.0, abs=1e-14)
    assert np.all(fine.signed_volumes() > 0)


def test_refinement_3d(cube_level):
    fine = refine_uniform(cube_level)
    assert fine.n_elements == 8 * cube_level.n_elements
    assert len(cube_level.interface_facets) == 48
    assert len(fine.interface_facets) == 4 * 48
    assert fine.outer_volume() == pytest.approx(0.875, abs=1e-13)
    assert fine.interface_measure() == pytest.approx(1.5, abs=1e-13)
    assert np.all(fine.signed_volumes() > 0)


def test_hierarchy_nesting(square_level):
    h = SimplicialMeshHierarchy.from_coarse(square_level, 2)
    assert len(h) == 3
    assert h.check_nesting()
    for coarse, fine in zip(h.levels[:-1], h.levels[1:]):
        np.testing.assert_array_equal(fine.coords[: coarse.n_vertices], coarse.coords)


def test_prolongation_reproduces_linear_functions(square_mesh):
    P = square_mesh.prolongation(1)
    coarse, fine = square_mesh.levels
    np.testing.assert_allclose(P.sum(axis=1).A.ravel(), 1.0)
    f = lambda x: 2.0 * x[:, 0] - 3.0 * x[:, 1] + 0.5  # noqa: E731
    np.testing.assert_allclose(P @ f(coarse.coords), f(fine.coords), atol=1e-14)


def test_interface_normals_point_out_of_inclusion(square_level):
    n = square_level.interface_normals()
    mid = square_level.coords[square_level.interface_facets].mean(axis=1)
    assert np.all(np.einsum("ij,ij->i", n, mid - 0.5) > 0)


def test_touching_inclusions_rejected():
    with pytest.raises(MeshError):
        structured_box(4, (1.0, 1.0), [((0.25, 0.25), (0.5, 0.5)), ((0.5, 0.25), (0.75, 0.5))])


def test_polygon_leaving_box_rejected():
    with pytest.raises(MeshError):
        polygon_inclusions([regular_polygon((0.1, 0.5), 0.25, 12)], h=0.1)


def test_polygon_perimeter_and_area():
    n, r = 16, 0.25
    level = polygon_inclusions([regular_polygon((0.5, 0.5), r, n)], h=0.12)
    assert level.interface_measure() == pytest.approx(2 * n * r * np.sin(np.pi / n), rel=1e-12)
    area = 0.5 * n * r * r * np.sin(2 * np.pi / n)
    assert level.outer_volume() == pytest.approx(1.0 - area, rel=1e-12)


def test_square_corner_curvature(square_level):
    kappa = discrete_mean_curvature(square_level)
    # turning angle pi/2 over edges of length 0.25
    assert kappa.max_abs() == pytest.approx(2.0 * np.pi, rel=1e-12)
    assert np.count_nonzero(np.abs(kappa.values) > 1e-12) == 4


def test_polygon_curvature_close_to_inverse_radius():
    n, r = 16, 0.25
    level = polygon_inclusions([regular_polygon((0.5, 0.5), r, n)], h=0.12)
    kappa = discrete_mean_curvature(level)
    expected = (2 * np.pi / n) / (2 * r * np.sin(np.pi / n))
    np.testing.assert_allclose(kappa.values, expected, rtol=1e-10)
    assert expected == pytest.approx(1.0 / r, rel=0.01)


def test_curvature_stays_bounded_with_projection():
    coarse = polygon_inclusions([regular_polygon((0.5, 0.5), 0.25, 32)], h=0.08)
    h = SimplicialMeshHierarchy.from_coarse(coarse, 2, radial_projection((0.5, 0.5), 0.25))
    values = [discrete_mean_curvature(level).max_abs() for level in h.levels]
    np.testing.assert_allclose(values, 4.0, rtol=0.02)
    assert h.check_nesting()


def test_flat_face_centers_have_zero_curvature_3d(cube_level):
    kappa = discrete_mean_curvature(cube_level)
    x = cube_level.coords[kappa.vertices]
    centers = np.sum(np.isclose(x, 0.5), axis=1) == 2
    assert centers.sum() == 6
    np.testing.assert_allclose(kappa.values[centers], 0.0, atol=1e-10)
    # corners of the convex cube bend outward
    corners = np.all(np.isclose(x, 0.25) | np.isclose(x, 0.75), axis=1)
    assert np.all(kappa.values[corners] > 0)


def test_star_polygon_samples():
    pts = star_polygon((0.5, 0.5), 0.2, 0.1, 5, 40)
    r = np.linalg.norm(pts - 0.5, axis=1)
    assert r.max() == pytest.approx(0.22)
    assert r.min() >= 0.18 - 1e-12


def test_deform_rejects_inversion(square_mesh):
    fine = square_mesh.finest
    U = np.zeros((fine.n_vertices, 2))
    k = int(np.argmin(np.linalg.norm(fine.coords - 0.5, axis=1)))
    U[k] = [2.0, 0.0]
    with pytest.raises(InvalidDeformationError) as info:
        deform_all_levels(square_mesh, U)
    assert len(info.value.elements) > 0


def test_deform_all_levels_keeps_nesting(square_mesh, rng):
    fine = square_mesh.finest
    U = 0.01 * rng.standard_normal((fine.n_vertices, 2))
    moved = deform_all_levels(square_mesh, U, 0.5)
    assert moved.check_nesting()
    np.testing.assert_allclose(moved.finest.coords, fine.coords + 0.5 * U)
    np.testing.assert_allclose(moved.levels[0].coords, square_mesh.levels[0].coords + 0.5 * U[: square_mesh.levels[0].n_vertices])
    # input untouched
    assert not np.shares_memory(moved.finest.coords, fine.coords)


def test_mesh_file_round_trip(polygon_mesh, tmp_path):
    level = polygon_mesh.finest
    path = write_mesh(level, tmp_path / "mesh.txt")
    back = read_mesh(path)
    np.testing.assert_array_equal(back.coords, level.coords)
    np.testing.assert_array_equal(back.elem_subdomain, level.elem_subdomain)
    assert back.interface_measure() == level.interface_measure()
    assert {tuple(sorted(f)) for f in back.interface_facets.tolist()} == {
        tuple(sorted(f)) for f in level.interface_facets.tolist()
    }


def test_read_mesh_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_mesh(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("2 3 x 0 0\n", encoding="utf-8")
    with pytest.raises(MeshError):
        read_mesh(bad)


def test_write_vtk(square_level, tmp_path):
    kappa = discrete_mean_curvature(square_level).at(square_level.n_vertices)
    U = np.zeros((square_level.n_vertices, 2))
    path = write_vtk(square_level, tmp_path / "m.vtk", {"curvature": kappa, "deformation": U})
    text = path.read_text()
    assert "DATASET UNSTRUCTURED_GRID" in text
    assert "SCALARS curvature double 1" in text
    assert "VECTORS deformation double" in text
