import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import BoundaryConditionError
from modules.fem.assembly import (
    assemble_diffusion,
    assemble_elasticity,
    assemble_elasticity_matrix,
    assemble_laplace,
    assemble_mass,
    element_geometry,
)
from modules.fem.boundary import (
    BoundaryConditionSet,
    Dirichlet,
    LinearSystem,
    diffusion_bcs,
    dirichlet_dofs,
    elasticity_bcs,
    neumann_load,
    sliding_bcs,
)
from modules.fem.schemas import MaterialCoefficients


def test_barycentric_gradients_sum_to_zero(square_level):
    vol, grads = element_geometry(square_level)
    assert vol.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(grads.sum(axis=1), 0.0, atol=1e-12)


def test_mass_integrates_volume(square_level, cube_level):
    for level in (square_level, cube_level):
        M = assemble_mass(level)
        ones = np.ones(level.n_vertices)
        assert ones @ M @ ones == pytest.approx(1.0, abs=1e-13)
        assert abs(M - M.T).max() == 0


def test_mass_integrates_linear_products(square_level):
    M = assemble_mass(square_level)
    x = square_level.coords[:, 0]
    # integral of x over the unit square
    assert np.ones(square_level.n_vertices) @ M @ x == pytest.approx(0.5, abs=1e-13)


def test_laplace_annihilates_constants(square_level):
    K = assemble_laplace(square_level, np.linspace(0.1, 2.0, square_level.n_elements))
    np.testing.assert_allclose(K @ np.ones(square_level.n_vertices), 0.0, atol=1e-12)
    x = square_level.coords[:, 0]
    assert x @ assemble_laplace(square_level) @ x == pytest.approx(1.0, abs=1e-12)


def test_elasticity_annihilates_rigid_motions(square_level):
    n = square_level.n_elements
    K = assemble_elasticity_matrix(square_level, np.full(n, 0.5), np.full(n, 0.2))
    x, y = square_level.coords.T
    for motion in (np.column_stack([np.ones_like(x), 0 * x]), np.column_stack([-y, x])):
        np.testing.assert_allclose(K @ motion.ravel(), 0.0, atol=1e-12)
    stretch = np.column_stack([x, 0 * y]).ravel()
    assert stretch @ K @ stretch > 0


def test_elasticity_rigid_motions_3d(cube_level):
    n = cube_level.n_elements
    K = assemble_elasticity_matrix(cube_level, np.full(n, 0.01), np.full(n, 0.1))
    x, y, z = cube_level.coords.T
    rot = np.column_stack([-y, x, 0 * z]).ravel()
    np.testing.assert_allclose(K @ rot, 0.0, atol=1e-12)


def test_neumann_traction_totals(square_level):
    load = neumann_load(square_level, elasticity_bcs(2, (0.0, -1.0)), 2)
    np.testing.assert_allclose(load.reshape(-1, 2).sum(axis=0), [0.0, -1.0], atol=1e-14)


def test_elastic_system_clamps_bottom(square_level):
    system = assemble_elasticity(square_level, MaterialCoefficients(), elasticity_bcs(2, (0.0, -1.0)))
    bottom = square_level.boundary_vertices("bottom")
    fixed = system.fixed.reshape(-1, 2)
    assert fixed[bottom].all()
    assert fixed.sum() == 2 * len(bottom)


def test_diffusion_dirichlet_top(square_level):
    system = assemble_diffusion(square_level, MaterialCoefficients(), diffusion_bcs(2, 1.0))
    top = square_level.boundary_vertices("top")
    np.testing.assert_array_equal(np.flatnonzero(system.fixed), top)
    np.testing.assert_allclose(system.values[top], 1.0)
    assert not np.any(system.load)
    step = system.step_system(1.5)
    assert step.matrix.shape == system.mass.shape


def test_elimination_keeps_constant_solution(square_level):
    system = assemble_diffusion(square_level, MaterialCoefficients(), diffusion_bcs(2, 1.0))
    A = system.stiffness
    lin = LinearSystem(A, np.zeros(square_level.n_vertices), system.fixed, system.values)
    # y = 1 satisfies K y = 0 with y = 1 on top
    np.testing.assert_allclose(lin.reduced_matrix() @ np.ones(lin.free.sum()), lin.reduced_rhs(), atol=1e-12)
    np.testing.assert_allclose(lin.expand(lin.restrict(np.full(square_level.n_vertices, 1.0))), 1.0)


def test_sliding_fixes_normal_components(square_level):
    fixed, values = dirichlet_dofs(square_level, sliding_bcs(2), 2)
    fixed = fixed.reshape(-1, 2)
    left = square_level.boundary_vertices("left")
    bottom = square_level.boundary_vertices("bottom")
    assert fixed[left, 0].all()
    assert fixed[bottom, 1].all()
    corner = np.intersect1d(left, bottom)
    assert fixed[corner].all()
    assert not np.any(values)


def test_sliding_rejects_rotated_box(square_level):
    c, s = np.cos(np.pi / 6), np.sin(np.pi / 6)
    rotated = square_level.with_coords(square_level.coords @ np.array([[c, s], [-s, c]]))
    with pytest.raises(BoundaryConditionError):
        dirichlet_dofs(rotated, sliding_bcs(2), 2)


def test_sliding_needs_vector_problem(square_level):
    with pytest.raises(BoundaryConditionError):
        dirichlet_dofs(square_level, sliding_bcs(2), 1)


def test_missing_boundary_label(square_level):
    with pytest.raises(BoundaryConditionError):
        dirichlet_dofs(square_level, BoundaryConditionSet({"top": Dirichlet(0.0)}), 1)


def test_material_coefficients_validation(square_level):
    with pytest.raises(ValidationError):
        MaterialCoefficients(lambda_out=-1.0, mu_out=0.1)
    with pytest.raises(ValidationError):
        MaterialCoefficients(k_int=0.0)
    coeffs = MaterialCoefficients(k_out=2.0, k_int=0.5)
    k = coeffs.per_element(square_level.elem_subdomain, "k")
    assert set(np.unique(k)) == {0.5, 2.0}


def test_lame_bound_depends_on_dimension(square_level, cube_level):
    # lambda + mu > 0 suffices in 2D, 3D needs lambda + 2 mu / 3 > 0
    coeffs = MaterialCoefficients(lambda_out=-0.08, mu_out=0.1)
    K = assemble_elasticity(square_level, coeffs, elasticity_bcs(2, (0.0, -1.0))).reduced_matrix()
    assert np.all(K.diagonal() > 0)
    with pytest.raises(ValueError):
        assemble_elasticity(cube_level, coeffs, elasticity_bcs(3, (0.0, 0.0, -1.0)))
    with pytest.raises(ValidationError):
        MaterialCoefficients(lambda_int=-0.1, mu_int=0.1)
