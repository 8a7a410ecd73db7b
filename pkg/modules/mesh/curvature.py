from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import MeshError

from .level import MeshLevel, facet_normals

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurvatureField:
    """Mean curvature (sum of principal curvatures) at interface vertices.

    Positive where the inclusion is locally convex, for the normal pointing out
    of the inclusion.
    """
    vertices: np.ndarray
    values: np.ndarray

    def at(self, n_vertices: int) -> np.ndarray:
        """Scatter into a full per-vertex array (zero off the interface)."""
        full = np.zeros(n_vertices)
        full[self.vertices] = self.values
        return full

    def max_abs(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0


def discrete_mean_curvature(level: MeshLevel) -> CurvatureField:
    if level.interface_facets.size == 0:
        return CurvatureField(np.zeros(0, dtype=np.int64), np.zeros(0))
    if level.dim == 2:
        return _turning_angle_curvature(level)
    return _cotangent_curvature(level)


# 2D: exterior turning angle over half the sum of the two incident edge lengths.
def _turning_angle_curvature(level: MeshLevel) -> CurvatureField:
    facets = level.interface_facets
    nv = level.n_vertices
    out_count = np.bincount(facets[:, 0], minlength=nv)
    in_count = np.bincount(facets[:, 1], minlength=nv)
    verts = np.unique(facets)
    if np.any(out_count[verts] != 1) or np.any(in_count[verts] != 1):
        raise MeshError("interface is not a union of closed simple polylines")

    outgoing = np.full(nv, -1)
    incoming = np.full(nv, -1)
    outgoing[facets[:, 0]] = np.arange(len(facets))
    incoming[facets[:, 1]] = np.arange(len(facets))

    x = level.coords
    e_in = facets[incoming[verts]]
    e_out = facets[outgoing[verts]]
    t_in = x[e_in[:, 1]] - x[e_in[:, 0]]
    t_out = x[e_out[:, 1]] - x[e_out[:, 0]]
    cross = t_in[:, 0] * t_out[:, 1] - t_in[:, 1] * t_out[:, 0]
    dot = np.einsum("ij,ij->i", t_in, t_out)
    angle = np.arctan2(cross, dot)
    half = 0.5 * (np.linalg.norm(t_in, axis=1) + np.linalg.norm(t_out, axis=1))
    return CurvatureField(verts, angle / half)


# 3D: cotangent Laplace-Beltrami of the position over the mixed Voronoi area.
def _cotangent_curvature(level: MeshLevel) -> CurvatureField:
    tris = level.interface_facets
    x = level.coords
    nv = level.n_vertices

    edges = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    _, counts = np.unique(edges, axis=0, return_counts=True)
    if np.any(counts != 2):
        raise MeshError("interface surface is not closed: some edges border one facet")

    hn = np.zeros((nv, 3))
    area = np.zeros(nv)
    normal = np.zeros((nv, 3))
    n_f = facet_normals(x, tris)
    for k in range(3):
        i, j, l = tris[:, k], tris[:, (k + 1) % 3], tris[:, (k + 2) % 3]
        # cotangent of the angle at vertex l weights edge (i, j)
        u, v = x[i] - x[l], x[j] - x[l]
        cot = np.einsum("ij,ij->i", u, v) / np.linalg.norm(np.cross(u, v), axis=1)
        diff = x[i] - x[j]
        np.add.at(hn, i, cot[:, None] * diff)
        np.add.at(hn, j, -cot[:, None] * diff)

    a, b, c = x[tris[:, 0]], x[tris[:, 1]], x[tris[:, 2]]
    tri_area = 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)
    corners = [(a, b, c), (b, c, a), (c, a, b)]
    for k, (p, q, r) in enumerate(corners):
        vi = tris[:, k]
        e_pq, e_pr, e_qr = q - p, r - p, r - q
        cos_p = np.einsum("ij,ij->i", e_pq, e_pr)
        cos_q = np.einsum("ij,ij->i", -e_pq, e_qr)
        cos_r = np.einsum("ij,ij->i", e_pr, e_qr)
        obtuse_p = cos_p < 0
        obtuse_other = (cos_q < 0) | (cos_r < 0)
        cot_q = cos_q / np.linalg.norm(np.cross(-e_pq, e_qr), axis=1)
        cot_r = cos_r / np.linalg.norm(np.cross(e_pr, e_qr), axis=1)
        voronoi = (np.einsum("ij,ij->i", e_pr, e_pr) * cot_q + np.einsum("ij,ij->i", e_pq, e_pq) * cot_r) / 8.0
        mixed = np.where(obtuse_p, tri_area / 2.0, np.where(obtuse_other, tri_area / 4.0, voronoi))
        np.add.at(area, vi, mixed)
        np.add.at(normal, vi, tri_area[:, None] * n_f)

    verts = np.unique(tris)
    K = hn[verts] / (2.0 * area[verts, None])
    sign = np.sign(np.einsum("ij,ij->i", K, normal[verts]))
    return CurvatureField(verts, sign * np.linalg.norm(K, axis=1))
