import numpy as np
import pytest

from core.errors import TrajectoryError
from modules.fem.schemas import MaterialCoefficients
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
from modules.physics.elastic import solve_elastic_pair, solve_elastic_state

COEFFS = MaterialCoefficients()


def test_adjoint_is_scaled_state(square_mesh):
    pair = solve_elastic_pair(square_mesh, COEFFS, (0.0, -1.0), nu1=0.7)
    np.testing.assert_allclose(pair.w, -0.7 * pair.u, atol=1e-8 * np.abs(pair.u).max())
    # compliance equals the work of the traction
    assert pair.energy() == pytest.approx(pair.system.load @ pair.u, rel=1e-8)
    assert pair.energy() > 0


def test_elastic_state_clamped_and_sagging(square_mesh):
    u = solve_elastic_state(square_mesh, COEFFS, (0.0, -1.0)).reshape(-1, 2)
    level = square_mesh.finest
    np.testing.assert_allclose(u[level.boundary_vertices("bottom")], 0.0)
    assert np.all(u[level.boundary_vertices("top"), 1] < 0)


def test_elastic_state_rejects_wrong_traction(square_mesh):
    with pytest.raises(ValueError):
        solve_elastic_state(square_mesh, COEFFS, (0.0, 0.0, -1.0))


def test_time_grid_helpers():
    assert n_time_steps(1.5, 15.0) == 10
    with pytest.raises(ValueError):
        n_time_steps(0.7, 15.0)
    assert instant_steps([7.5, 15.0], 1.5, 15.0) == [5, 10]
    with pytest.raises(ValueError):
        instant_steps([7.0], 1.5, 15.0)
    with pytest.raises(ValueError):
        instant_steps([16.5], 1.5, 15.0)


def test_tracking_weights():
    w = tracking_weights(4, 0.5)
    np.testing.assert_allclose(w, [0.0, 0.5, 0.5, 0.5, 0.5])
    w = tracking_weights(4, 0.5, "instants", [2, 4])
    np.testing.assert_allclose(w, [0.0, 0.0, 1.0, 0.0, 1.0])
    with pytest.raises(ValueError):
        tracking_weights(4, 0.5, "pointwise")


def test_state_approaches_top_value(square_mesh, direct):
    y = march_diffusion_state(square_mesh, COEFFS, 1.5, 15.0, direct)
    assert y.n_steps == 10 and y.dt == pytest.approx(1.5)
    assert not np.any(y[0])
    top = square_mesh.finest.boundary_vertices("top")
    np.testing.assert_allclose(y.values[1:, top], 1.0)
    M = diffusion_system(square_mesh, COEFFS).mass
    dist = [np.sqrt((v - 1.0) @ M @ (v - 1.0)) for v in y.values]
    assert np.all(np.diff(dist) <= 1e-12)
    assert dist[-1] < dist[1]


def test_adjoint_vanishes_on_perfect_data(square_mesh, direct):
    y = march_diffusion_state(square_mesh, COEFFS, 0.5, 1.5, direct)
    z = march_diffusion_adjoint(square_mesh, COEFFS, 0.5, 1.5, y, y, nu2=1.0, settings=direct)
    np.testing.assert_allclose(z.values, 0.0, atol=1e-14)


def test_adjoint_matches_source_sensitivity(square_mesh, direct, rng):
    dt, T, nu2 = 0.5, 1.5, 2.0
    system = diffusion_system(square_mesh, COEFFS)
    y = march_diffusion_state(square_mesh, COEFFS, dt, T, direct, system=system)
    ybar = TransientTrajectory(y.times, 0.5 * np.ones_like(y.values))
    weights = tracking_weights(y.n_steps, dt)
    z = march_diffusion_adjoint(square_mesh, COEFFS, dt, T, y, ybar, nu2, weights, direct, system)
    top = square_mesh.finest.boundary_vertices("top")
    np.testing.assert_allclose(z.values[:, top], 0.0)

    S = rng.standard_normal(y.values.shape)
    S[:, top] = 0.0

    def J(eps):
        ys = march_diffusion_state(square_mesh, COEFFS, dt, T, direct, sources=eps * S, system=system)
        return tracking_value(system.mass, ys, ybar, weights, nu2)

    eps = 1e-3
    fd = (J(eps) - J(-eps)) / (2 * eps)
    assert fd == pytest.approx(-np.sum(z.values[1:] * S[1:]), rel=1e-6)


def test_adjoint_checks_alignment(square_mesh, direct):
    y = march_diffusion_state(square_mesh, COEFFS, 0.5, 1.5, direct)
    short = TransientTrajectory(y.times[:-1], y.values[:-1])
    with pytest.raises(TrajectoryError):
        march_diffusion_adjoint(square_mesh, COEFFS, 0.5, 1.5, y, short, nu2=1.0)
    with pytest.raises(TrajectoryError):
        march_diffusion_adjoint(square_mesh, COEFFS, 0.5, 1.5, y, y, nu2=1.0, weights=np.ones(2))


def test_tracking_value_zero_for_identical_trajectories(square_mesh, direct):
    y = march_diffusion_state(square_mesh, COEFFS, 0.5, 1.0, direct)
    M = diffusion_system(square_mesh, COEFFS).mass
    assert tracking_value(M, y, y, tracking_weights(2, 0.5), 1.0) == 0.0
    shifted = TransientTrajectory(y.times, y.values + 1.0)
    # |1|_M^2 = 1 on the unit square at two weighted steps
    assert tracking_value(M, y, shifted, tracking_weights(2, 0.5), 1.0) == pytest.approx(0.5)
