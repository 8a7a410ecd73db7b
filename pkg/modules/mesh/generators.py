"""Built-in coarse meshes for the canonical scenarios.

Structured generators place inclusion boundaries on grid lines; the polygon
generator builds a boundary-conforming Delaunay triangulation whose edges
contain every polygon edge.
"""
from __future__ import annotations

import itertools
import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import Delaunay

from core.errors import MeshError

from .level import MeshLevel, build_level

logger = logging.getLogger(__name__)

Box = Tuple[Sequence[float], Sequence[float]]


def reference_triangle() -> MeshLevel:
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    return build_level(coords, np.array([[0, 1, 2]]), np.zeros(1, dtype=np.int64))


def unit_square_two_triangles() -> MeshLevel:
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return build_level(coords, np.array([[0, 1, 2], [0, 2, 3]]), np.zeros(2, dtype=np.int64))


def _grid(n: int, extent: Sequence[float], dim: int) -> np.ndarray:
    axes = [np.linspace(0.0, extent[k], n + 1) for k in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def _cells(n: int, dim: int) -> np.ndarray:
    """Vertex index of every cell corner, corners ordered by their bit pattern."""
    stride = [(n + 1) ** (dim - 1 - k) for k in range(dim)]
    base = np.array([sum(i[k] * stride[k] for k in range(dim))
                     for i in itertools.product(range(n), repeat=dim)])
    offsets = [sum(b[k] * stride[k] for k in range(dim)) for b in itertools.product((0, 1), repeat=dim)]
    return base[:, None] + np.array(offsets)[None, :]


def _split_cells(cells: np.ndarray, dim: int) -> np.ndarray:
    if dim == 2:
        # corners (00, 01, 10, 11): diagonal from 00 to 11
        return np.concatenate([cells[:, [0, 2, 3]], cells[:, [0, 3, 1]]])
    # Kuhn split: one tetrahedron per axis permutation along the 000-111 diagonal
    tets = []
    for perm in itertools.permutations(range(3)):
        bits = [0, 0, 0]
        path = [0]
        for axis in perm:
            bits[axis] = 1
            path.append(bits[0] * 4 + bits[1] * 2 + bits[2])
        tets.append(cells[:, path])
    return np.concatenate(tets)


def structured_box(
    n: int,
    extent: Sequence[float] = (1.0, 1.0),
    inclusions: Sequence[Box] = (),
) -> MeshLevel:
    """Box [0, extent] split into n^d cells; elements inside inclusion i get label i.

    Inclusion boxes should lie on grid lines and must not touch each other or the
    outer boundary.
    """
    dim = len(extent)
    if dim not in (2, 3):
        raise ValueError("structured_box supports 2D and 3D boxes only")
    if n < 1:
        raise ValueError("n must be positive")
    coords = _grid(n, extent, dim)
    simplices = _split_cells(_cells(n, dim), dim)
    centroids = coords[simplices].mean(axis=1)
    subdomain = np.zeros(len(simplices), dtype=np.int64)
    for i, (lo, hi) in enumerate(inclusions, start=1):
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        if np.any(lo <= 0) or np.any(hi >= np.asarray(extent)):
            raise MeshError(f"inclusion {i} touches the outer boundary")
        inside = np.all((centroids > lo) & (centroids < hi), axis=1)
        if np.any(subdomain[inside] != 0):
            raise MeshError(f"inclusion {i} overlaps another inclusion")
        subdomain[inside] = i
    return build_level(coords, simplices, subdomain)


def square_inclusion(n: int, lo: float = 0.25, hi: float = 0.75, dim: int = 2) -> MeshLevel:
    return structured_box(n, (1.0,) * dim, [((lo,) * dim, (hi,) * dim)])


# ---------------------------------------------------------------------------
# Polygon inclusions

def regular_polygon(center: Sequence[float], radius: float, n: int, phase: float = 0.0) -> np.ndarray:
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    return np.asarray(center, float) + radius * np.column_stack([np.cos(theta), np.sin(theta)])


def star_polygon(center: Sequence[float], r0: float, amplitude: float, lobes: int, n: int) -> np.ndarray:
    """Counter-clockwise samples of r(t) = r0 (1 + amplitude cos(lobes t))."""
    theta = 2.0 * np.pi * np.arange(n) / n
    r = r0 * (1.0 + amplitude * np.cos(lobes * theta))
    return np.asarray(center, float) + r[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])


def lattice_polygons(k: int, radius: float, n: int, extent: Sequence[float] = (1.0, 1.0)) -> list:
    """k x k regular polygons centered in the cells of a uniform lattice."""
    cx = (np.arange(k) + 0.5) * extent[0] / k
    cy = (np.arange(k) + 0.5) * extent[1] / k
    return [regular_polygon((x, y), radius, n) for y in cy for x in cx]


def points_in_polygon(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    """Even-odd ray casting test, vectorized over points."""
    x, y = points[:, 0][:, None], points[:, 1][:, None]
    a = polygon
    b = np.roll(polygon, -1, axis=0)
    crosses = (a[:, 1] > y) != (b[:, 1] > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_at = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
    return np.count_nonzero(crosses & (x < x_at), axis=1) % 2 == 1


def distance_to_polyline(points: np.ndarray, polygon: np.ndarray) -> np.ndarray:
    a = polygon[None, :, :]
    b = np.roll(polygon, -1, axis=0)[None, :, :]
    p = points[:, None, :]
    ab = b - a
    t = np.clip(np.einsum("ijk,ijk->ij", p - a, ab) / np.einsum("ijk,ijk->ij", ab, ab), 0.0, 1.0)
    closest = a + t[..., None] * ab
    return np.linalg.norm(p - closest, axis=2).min(axis=1)


def _box_boundary_points(extent: Sequence[float], h: float) -> np.ndarray:
    lx, ly = extent
    nx, ny = max(int(np.ceil(lx / h)), 1), max(int(np.ceil(ly / h)), 1)
    xs = np.linspace(0.0, lx, nx + 1)
    ys = np.linspace(0.0, ly, ny + 1)[1:-1]
    return np.vstack([
        np.column_stack([xs, np.zeros_like(xs)]),
        np.column_stack([xs, np.full_like(xs, ly)]),
        np.column_stack([np.zeros_like(ys), ys]),
        np.column_stack([np.full_like(ys, lx), ys]),
    ])


def _lattice_points(extent: Sequence[float], h: float) -> np.ndarray:
    dy = h * np.sqrt(3.0) / 2.0
    rows = np.arange(dy, extent[1], dy)
    pts = []
    for j, y in enumerate(rows):
        xs = np.arange(h / 2.0 if j % 2 else h, extent[0], h)
        pts.append(np.column_stack([xs, np.full_like(xs, y)]))
    return np.vstack(pts) if pts else np.zeros((0, 2))


def polygon_inclusions(
    polygons: Sequence[np.ndarray],
    h: float,
    extent: Sequence[float] = (1.0, 1.0),
    clearance: Optional[float] = None,
) -> MeshLevel:
    """Delaunay mesh of the box whose edges include every polygon edge.

    Background lattice points closer than ``clearance`` to a polygon are dropped,
    which leaves each polygon edge with an empty diametral circle.
    """
    polygons = [np.asarray(p, float) for p in polygons]
    spacing = max(float(np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1).max()) for p in polygons)
    clearance = clearance if clearance is not None else 0.7 * max(h, spacing)

    lattice = _lattice_points(extent, h)
    keep = np.ones(len(lattice), dtype=bool)
    keep &= np.all(lattice > 0.5 * h, axis=1) & np.all(lattice < np.asarray(extent) - 0.5 * h, axis=1)
    for poly in polygons:
        if np.any(poly <= 0) or np.any(poly >= np.asarray(extent)):
            raise MeshError("inclusion polygon leaves the hold-all box")
        keep &= distance_to_polyline(lattice, poly) >= clearance

    points = np.vstack([_box_boundary_points(extent, h), lattice[keep]] + polygons)
    offsets = np.cumsum([0] + [len(_box_boundary_points(extent, h)) + int(keep.sum())] + [len(p) for p in polygons])
    tri = Delaunay(points)
    simplices = tri.simplices
    centroids = points[simplices].mean(axis=1)
    subdomain = np.zeros(len(simplices), dtype=np.int64)
    for i, poly in enumerate(polygons, start=1):
        subdomain[points_in_polygon(centroids, poly)] = i

    level = build_level(points, simplices, subdomain)

    # every polygon edge must be present as an interface facet
    have = {tuple(sorted(f)) for f in level.interface_facets.tolist()}
    for i, poly in enumerate(polygons):
        ids = np.arange(offsets[i + 1], offsets[i + 1] + len(poly))
        want = {tuple(sorted(e)) for e in zip(ids.tolist(), np.roll(ids, -1).tolist())}
        if not want <= have or len(want) != int(np.count_nonzero(level.interface_region == i + 1)):
            raise MeshError(f"polygon {i + 1} is not resolved by the triangulation; reduce h or resample the polygon")
    logger.debug("polygon mesh: %d vertices, %d triangles, %d interface edges",
                 level.n_vertices, level.n_elements, len(level.interface_facets))
    return level
