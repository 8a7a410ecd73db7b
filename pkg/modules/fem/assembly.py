"""P1 assembly on one mesh level.

All element integrands of first-order elements are element-wise constant, so
stiffness terms use exact one-point quadrature; mass terms use the exact
consistent P1 element mass matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from modules.mesh.level import MeshLevel

from .boundary import BoundaryConditionSet, LinearSystem, dirichlet_dofs, neumann_load
from .schemas import MaterialCoefficients

logger = logging.getLogger(__name__)


def element_geometry(level: MeshLevel, coords: np.ndarray | None = None) -> Tuple[np.ndarray, np.ndarray]:
    """Element volumes (ne,) and barycentric gradients (ne, d+1, d)."""
    x = level.coords if coords is None else coords
    s = level.simplices
    d = x.shape[1]
    x0 = x[s[:, 0]]
    jac = np.stack([x[s[:, k]] - x0 for k in range(1, d + 1)], axis=-1)  # columns x_k - x_0
    vol = np.linalg.det(jac) / (2.0 if d == 2 else 6.0)
    inv = np.linalg.inv(jac)  # rows are gradients of lambda_1..lambda_d
    grads = np.concatenate([-inv.sum(axis=1, keepdims=True), inv], axis=1)
    return vol, grads


def _scatter(level: MeshLevel, local: np.ndarray, ncomp: int) -> sp.csr_matrix:
    """Sum element matrices (ne, nb*ncomp, nb*ncomp) into a symmetric global matrix."""
    s = level.simplices
    ne, nb = s.shape
    dofs = (ncomp * s[:, :, None] + np.arange(ncomp)[None, None, :]).reshape(ne, nb * ncomp)
    rows = np.repeat(dofs, nb * ncomp, axis=1).ravel()
    cols = np.tile(dofs, (1, nb * ncomp)).ravel()
    n = level.n_vertices * ncomp
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    A.sum_duplicates()
    return ((A + A.T) * 0.5).tocsr()


def laplace_element_matrices(vol: np.ndarray, grads: np.ndarray, k_elem: np.ndarray) -> np.ndarray:
    return (k_elem * vol)[:, None, None] * np.einsum("eik,ejk->eij", grads, grads)


def assemble_laplace(level: MeshLevel, k_elem: np.ndarray | None = None) -> sp.csr_matrix:
    """Stiffness of the form integral(k grad y . grad z) with element-wise k."""
    vol, grads = element_geometry(level)
    k = np.ones(level.n_elements) if k_elem is None else np.asarray(k_elem, float)
    return _scatter(level, laplace_element_matrices(vol, grads, k), 1)


def mass_element_matrix(dim: int) -> np.ndarray:
    nb = dim + 1
    return (np.ones((nb, nb)) + np.eye(nb)) / ((dim + 1) * (dim + 2))


def assemble_mass(level: MeshLevel) -> sp.csr_matrix:
    """Consistent (unlumped) P1 mass matrix."""
    vol = level.signed_volumes()
    local = vol[:, None, None] * mass_element_matrix(level.dim)[None, :, :]
    return _scatter(level, local, 1)


def elasticity_element_matrices(vol: np.ndarray, grads: np.ndarray, lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Element stiffness of integral(sigma(u) : eps(v)), local dof (a, i) -> a*d + i.

    a(phi_a e_i, phi_b e_j) = vol * (lam d_i phi_a d_j phi_b
                                     + mu (delta_ij grad phi_a . grad phi_b + d_j phi_a d_i phi_b))
    """
    ne, nb, d = grads.shape
    gg = np.einsum("eak,ebk->eab", grads, grads)
    eye = np.eye(d)
    K = (
        lam[:, None, None, None, None] * np.einsum("eai,ebj->eaibj", grads, grads)
        + mu[:, None, None, None, None] * (
            np.einsum("eab,ij->eaibj", gg, eye) + np.einsum("eaj,ebi->eaibj", grads, grads)
        )
    )
    return vol[:, None, None] * K.reshape(ne, nb * d, nb * d)


def assemble_elasticity_matrix(level: MeshLevel, lam_elem: np.ndarray, mu_elem: np.ndarray) -> sp.csr_matrix:
    vol, grads = element_geometry(level)
    local = elasticity_element_matrices(vol, grads, np.asarray(lam_elem, float), np.asarray(mu_elem, float))
    return _scatter(level, local, level.dim)


def assemble_elasticity(level: MeshLevel, coeffs: MaterialCoefficients, bcs: BoundaryConditionSet) -> LinearSystem:
    """Stiffness with jumping Lamé parameters, Neumann tractions and eliminated constraints."""
    coeffs.require_elliptic(level.dim)
    lam = coeffs.per_element(level.elem_subdomain, "lambda")
    mu = coeffs.per_element(level.elem_subdomain, "mu")
    K = assemble_elasticity_matrix(level, lam, mu)
    load = neumann_load(level, bcs, level.dim)
    fixed, values = dirichlet_dofs(level, bcs, level.dim)
    return LinearSystem(matrix=K, load=load, fixed=fixed, values=values)


@dataclass
class DiffusionSystem:
    """Stiffness, mass and Dirichlet data of the transient diffusion problem."""
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    load: np.ndarray
    fixed: np.ndarray
    values: np.ndarray

    def step_system(self, dt: float) -> LinearSystem:
        """Backward Euler operator M + dt K with the same constraints."""
        return LinearSystem(
            matrix=(self.mass + dt * self.stiffness).tocsr(),
            load=self.load,
            fixed=self.fixed,
            values=self.values,
        )


def assemble_diffusion(level: MeshLevel, coeffs: MaterialCoefficients, bcs: BoundaryConditionSet) -> DiffusionSystem:
    k = coeffs.per_element(level.elem_subdomain, "k")
    K = assemble_laplace(level, k)
    M = assemble_mass(level)
    load = neumann_load(level, bcs, 1)
    fixed, values = dirichlet_dofs(level, bcs, 1)
    return DiffusionSystem(stiffness=K, mass=M, load=load, fixed=fixed, values=values)
