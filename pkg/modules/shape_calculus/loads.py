"""Assembly of shape derivative loads b(V) over P1 deformation fields.

Loads are node-major vectors (nv * d,) so that b(V) = b . V for a field V of
shape (nv, d). Volume integrands depend on grad V only and are exact with
one-point quadrature; products of P1 state fields use the element mass matrix.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import FrozenSet, Iterable

import numpy as np

from modules.fem.assembly import element_geometry, mass_element_matrix
from modules.fem.boundary import dirichlet_dofs, sliding_bcs
from modules.fem.schemas import MaterialCoefficients
from modules.mesh.curvature import CurvatureField
from modules.mesh.level import OUT, MeshLevel, facet_measures
from modules.physics.diffusion import TransientTrajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShapeDerivativeLoad:
    values: np.ndarray
    components: FrozenSet[str]
    form: str = "volume"

    def __call__(self, V: np.ndarray) -> float:
        return float(self.values @ np.asarray(V, float).ravel())

    def __add__(self, other: "ShapeDerivativeLoad") -> "ShapeDerivativeLoad":
        form = self.form if self.form == other.form else "mixed"
        return ShapeDerivativeLoad(self.values + other.values, self.components | other.components, form)

    def as_field(self, dim: int) -> np.ndarray:
        return self.values.reshape(-1, dim)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


def total_load(loads: Iterable[ShapeDerivativeLoad], size: int) -> ShapeDerivativeLoad:
    out = ShapeDerivativeLoad(np.zeros(size), frozenset())
    for b in loads:
        out = out + b if out.components else b
    return out


# ---------------------------------------------------------------------------
# Support restriction

def interface_support(level: MeshLevel) -> np.ndarray:
    """Vertices with an incident element that touches the interface."""
    on_iface = np.zeros(level.n_vertices, dtype=bool)
    on_iface[level.interface_vertices()] = True
    touching = on_iface[level.simplices].any(axis=1)
    mask = np.zeros(level.n_vertices, dtype=bool)
    mask[level.simplices[touching].ravel()] = True
    return mask


def active_dofs(level: MeshLevel) -> np.ndarray:
    """Dofs that may carry load: interface-supported and not sliding-constrained."""
    d = level.dim
    fixed, _ = dirichlet_dofs(level, sliding_bcs(d), d)
    return np.repeat(interface_support(level), d) & ~fixed


def _finish(level: MeshLevel, b: np.ndarray, name: str, form: str, restrict: bool) -> ShapeDerivativeLoad:
    values = b.ravel()
    if restrict:
        values = np.where(active_dofs(level), values, 0.0)
    return ShapeDerivativeLoad(values, frozenset({name}), form)


def _gradient_load(level: MeshLevel, C: np.ndarray, vol: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Load of sum_e vol_e C_e[i, k] d_k V_i, returned as (nv, d)."""
    local = vol[:, None, None] * np.einsum("eik,eak->eai", C, grads)
    b = np.zeros((level.n_vertices, level.dim))
    for a in range(level.dim + 1):
        np.add.at(b, level.simplices[:, a], local[:, a, :])
    return b


def element_gradient(level: MeshLevel, field: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Element gradients of a nodal field: (ne, d) for scalars, (ne, c, d) for vectors."""
    vals = np.asarray(field, float)[level.simplices]
    if vals.ndim == 2:
        return np.einsum("ea,eak->ek", vals, grads)
    return np.einsum("eai,eak->eik", vals, grads)


def element_mass_product(level: MeshLevel, f: np.ndarray, g: np.ndarray, vol: np.ndarray) -> np.ndarray:
    """Exact integral of f g over each element for P1 fields f, g."""
    d = level.dim
    F, G = f[level.simplices], g[level.simplices]
    c = mass_element_matrix(d)[0, 1]
    return vol * c * (F.sum(axis=1) * G.sum(axis=1) + np.einsum("ea,ea->e", F, G))


def stress(grad_u: np.ndarray, lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    eps = 0.5 * (grad_u + np.swapaxes(grad_u, 1, 2))
    tr = np.trace(eps, axis1=1, axis2=2)
    d = grad_u.shape[1]
    return lam[:, None, None] * tr[:, None, None] * np.eye(d)[None] + 2.0 * mu[:, None, None] * eps


# ---------------------------------------------------------------------------
# Components

def assemble_dj1(
    u: np.ndarray,
    w: np.ndarray,
    level: MeshLevel,
    coeffs: MaterialCoefficients,
    restrict: bool = True,
) -> ShapeDerivativeLoad:
    """Compliance derivative from the shared-operator Lagrangian.

    Integrand: -sigma(u) : (grad w grad V) - sigma(w) : (grad u grad V) + div V sigma(w) : grad u,
    with (grad u)_ik = d_k u_i. Since w = -nu1 u, the weight enters through w.
    """
    d = level.dim
    vol, grads = element_geometry(level)
    gu = element_gradient(level, np.asarray(u).reshape(-1, d), grads)
    gw = element_gradient(level, np.asarray(w).reshape(-1, d), grads)
    lam = coeffs.per_element(level.elem_subdomain, "lambda")
    mu = coeffs.per_element(level.elem_subdomain, "mu")
    su, sw = stress(gu, lam, mu), stress(gw, lam, mu)
    # coefficient of d_k V_i
    C = -np.einsum("eji,ejk->eik", gw, su) - np.einsum("eji,ejk->eik", gu, sw)
    C += np.einsum("eij,eij->e", sw, gu)[:, None, None] * np.eye(d)[None]
    return _finish(level, _gradient_load(level, C, vol, grads), "j1", "volume", restrict)


def assemble_dj2(
    y: TransientTrajectory,
    z: TransientTrajectory,
    ybar: TransientTrajectory,
    level: MeshLevel,
    coeffs: MaterialCoefficients,
    nu2: float,
    weights: np.ndarray,
    restrict: bool = True,
) -> ShapeDerivativeLoad:
    """Time-summed tracking derivative with the backward-difference time derivative.

    Per step n: dt k (-grad y (grad V + grad V^T) grad z + div V grad y . grad z)
    + div V ((y^n - y^{n-1}) z^n + nu2 w_n (y^n - ybar^n)^2 / 2).
    """
    y.check_aligned(z)
    y.check_aligned(ybar)
    d = level.dim
    vol, grads = element_geometry(level)
    k = coeffs.per_element(level.elem_subdomain, "k")
    dt = y.dt
    C = np.zeros((level.n_elements, d, d))
    div_part = np.zeros(level.n_elements)
    for n in range(1, y.n_steps + 1):
        gy = element_gradient(level, y[n], grads)
        gz = element_gradient(level, z[n], grads)
        C -= (dt * k)[:, None, None] * (np.einsum("ei,ek->eik", gy, gz) + np.einsum("ei,ek->eik", gz, gy))
        div_part += dt * k * np.einsum("ek,ek->e", gy, gz)
        div_part += element_mass_product(level, y[n] - y[n - 1], z[n], vol) / vol
        if weights[n] != 0.0:
            e = y[n] - ybar[n]
            div_part += 0.5 * nu2 * weights[n] * element_mass_product(level, e, e, vol) / vol
    C += div_part[:, None, None] * np.eye(d)[None]
    return _finish(level, _gradient_load(level, C, vol, grads), "j2", "volume", restrict)


def assemble_dj3(level: MeshLevel, nu3: float, restrict: bool = True) -> ShapeDerivativeLoad:
    """nu3 * integral of div V over the outer region."""
    d = level.dim
    vol, grads = element_geometry(level)
    C = np.where(level.elem_subdomain == OUT, nu3, 0.0)[:, None, None] * np.eye(d)[None]
    return _finish(level, _gradient_load(level, C, vol, grads), "j3", "volume", restrict)


def assemble_dj4_surface(level: MeshLevel, kappa: CurvatureField, nu4: float, restrict: bool = True) -> ShapeDerivativeLoad:
    """nu4 * integral over the interface of kappa <V, n>, facet midpoint rule."""
    d = level.dim
    facets = level.interface_facets
    b = np.zeros((level.n_vertices, d))
    if facets.size:
        k_full = kappa.at(level.n_vertices)
        kbar = k_full[facets].mean(axis=1)
        area = facet_measures(level.coords, facets)
        n = level.interface_normals()
        share = (nu4 * area * kbar / d)[:, None] * n
        for a in range(d):
            np.add.at(b, facets[:, a], share)
    return _finish(level, b, "j4", "surface", restrict)


def assemble_dj4_volume(level: MeshLevel, nu4: float, restrict: bool = True) -> ShapeDerivativeLoad:
    """nu4 * integral over the interface of the tangential divergence div V - n^T grad V n."""
    d = level.dim
    facets = level.interface_facets
    b = np.zeros((level.n_vertices, d))
    if facets.size:
        _, grads = element_geometry(level)
        owner = level.interface_owner
        n = level.interface_normals()
        area = facet_measures(level.coords, facets)
        P = np.eye(d)[None] - np.einsum("fi,fj->fij", n, n)
        tangential = np.einsum("fij,faj->fai", P, grads[owner])  # (P grad phi_a) per owner vertex
        contrib = (nu4 * area)[:, None, None] * tangential
        for a in range(d + 1):
            np.add.at(b, level.simplices[owner, a], contrib[:, a, :])
    return _finish(level, b, "j4", "volume", restrict)
