import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from core.errors import SingularOperatorError, SolverError
from modules.fem.assembly import assemble_diffusion, assemble_laplace, assemble_mass
from modules.fem.boundary import diffusion_bcs, elasticity_bcs
from modules.fem.assembly import assemble_elasticity
from modules.fem.schemas import MaterialCoefficients
from modules.mesh.generators import square_inclusion
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.multigrid.pcg import jacobi, pcg
from modules.multigrid.schemas import SolverSettings
from modules.multigrid.solve import SystemSolver, build_mg, free_prolongations
from modules.multigrid.vcycle import MgHierarchy


@pytest.fixture
def three_levels():
    return SimplicialMeshHierarchy.from_coarse(square_inclusion(4), 2)


def diffusion_step(mesh, dt=1.5):
    level = mesh.finest
    return assemble_diffusion(level, MaterialCoefficients(), diffusion_bcs(level.dim, 1.0)).step_system(dt)


def test_pcg_matches_direct_solve(three_levels):
    system = diffusion_step(three_levels)
    A, b = system.reduced_matrix(), system.reduced_rhs()
    result = pcg(A, b, jacobi(A), rtol=1e-12, maxit=1000)
    assert result.converged
    np.testing.assert_allclose(result.x, spsolve(A.tocsc(), b), rtol=1e-9, atol=1e-11)


def test_pcg_diagonal_system_with_jacobi_converges_in_one_step():
    A = sp.diags([1.0, 4.0, 9.0, 16.0]).tocsr()
    b = np.array([1.0, 2.0, 3.0, 4.0])
    x, its = pcg(A, b, jacobi(A), rtol=1e-14)
    assert its == 1
    np.testing.assert_allclose(x, b / A.diagonal())


def test_pcg_zero_rhs():
    A = sp.identity(3, format="csr")
    result = pcg(A, np.zeros(3))
    assert result.converged and result.iterations == 0
    assert not np.any(result.x)


def test_pcg_rejects_indefinite_operator():
    A = sp.diags([1.0, -1.0]).tocsr()
    with pytest.raises(SolverError) as info:
        pcg(A, np.array([1.0, 1.0]))
    assert info.value.iterations >= 1


def test_pcg_reports_non_convergence():
    A = assemble_laplace(square_inclusion(8)) + sp.identity(81)
    # constants are an eigenvector of A, so the right-hand side must not be one
    result = pcg(A.tocsr(), np.arange(81.0), rtol=1e-14, maxit=2)
    assert not result.converged
    assert result.iterations == 2


def test_vcycle_preconditioner_iterations_small(three_levels):
    system = diffusion_step(three_levels)
    mg = build_mg(three_levels, system, 1, SolverSettings())
    assert mg.n_levels == 3
    result = pcg(system.reduced_matrix(), system.reduced_rhs(), mg, rtol=1e-10)
    assert result.converged
    assert result.iterations <= 15


def test_vcycle_is_symmetric(three_levels, rng):
    system = diffusion_step(three_levels)
    mg = build_mg(three_levels, system, 1, SolverSettings())
    n = system.free.sum()
    r1, r2 = rng.standard_normal(n), rng.standard_normal(n)
    assert r1 @ mg(r2) == pytest.approx(r2 @ mg(r1), rel=1e-9)
    assert r1 @ mg(r1) > 0


def test_galerkin_detects_indefinite_coarse_operator(three_levels):
    level = three_levels.finest
    A = (assemble_laplace(level) - 0.1 * assemble_mass(level)).tocsr()
    P = free_prolongations(three_levels, np.zeros(level.n_vertices, dtype=bool), 1)
    with pytest.raises(SingularOperatorError) as info:
        MgHierarchy.galerkin(A, P)
    assert "non-positive eigenvalues" in info.value.null_space_hint


def test_mg_hierarchy_needs_matching_prolongations():
    A = sp.identity(4, format="csr")
    with pytest.raises(ValueError):
        MgHierarchy([A, A], [])


def test_system_solver_mg_agrees_with_direct(three_levels):
    level = three_levels.finest
    system = assemble_elasticity(level, MaterialCoefficients(), elasticity_bcs(2, (0.0, -1.0)))
    mg = SystemSolver(system, three_levels, 2, SolverSettings(rtol=1e-12))
    lu = SystemSolver(system, three_levels, 2, SolverSettings(method="direct"))
    u_mg, u_lu = mg.solve(), lu.solve()
    np.testing.assert_allclose(u_mg, u_lu, atol=1e-9 * np.abs(u_lu).max())
    assert 0 < mg.iterations[-1] <= 40
    assert lu.iterations == [0]


def test_system_solver_keeps_prescribed_values(square_mesh):
    system = diffusion_step(square_mesh)
    solver = SystemSolver(system, square_mesh, 1)
    y = solver.solve(np.zeros(square_mesh.finest.n_vertices))
    np.testing.assert_allclose(y[system.fixed], 1.0)
    zero = solver.solve(np.zeros_like(y), np.zeros_like(y))
    np.testing.assert_allclose(zero, 0.0)


def test_system_solver_single_level():
    mesh = SimplicialMeshHierarchy.from_coarse(square_inclusion(4), 0)
    system = diffusion_step(mesh)
    solver = SystemSolver(system, mesh, 1)
    x = solver.solve(system.load)
    ref = SystemSolver(system, mesh, 1, SolverSettings(method="direct")).solve(system.load)
    np.testing.assert_allclose(x, ref, atol=1e-10)


def test_solver_error_when_maxit_too_small(three_levels):
    system = diffusion_step(three_levels)
    solver = SystemSolver(system, three_levels, 1, SolverSettings(rtol=1e-14, maxit=1))
    with pytest.raises(SolverError):
        solver.solve(system.load)


def test_galerkin_operator_matches_coarse_assembly(three_levels):
    coarse, fine = three_levels.levels[1], three_levels.levels[2]
    k_fine = MaterialCoefficients().per_element(fine.elem_subdomain, "k")
    k_coarse = MaterialCoefficients().per_element(coarse.elem_subdomain, "k")
    P = three_levels.prolongation(2)
    galerkin = (P.T @ assemble_laplace(fine, k_fine) @ P).toarray()
    np.testing.assert_allclose(galerkin, assemble_laplace(coarse, k_coarse).toarray(), atol=1e-12)
