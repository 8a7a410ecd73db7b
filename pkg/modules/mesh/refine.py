from __future__ import annotations

import logging

import numpy as np

from core.errors import MeshError

from .level import MeshLevel, RefinementMap, build_level, check_conforming

logger = logging.getLogger(__name__)

# Red refinement children of a triangle (v0, v1, v2) with midpoints m01, m12, m02.
# Local numbering: 0..2 vertices, 3=m01, 4=m12, 5=m02.
_TRI_CHILDREN = np.array([
    [0, 3, 5],
    [3, 1, 4],
    [5, 4, 2],
    [3, 4, 5],
])

# Regular refinement of a tetrahedron with the inner octahedron split along m02-m13.
# Local numbering: 0..3 vertices, 4=m01, 5=m02, 6=m03, 7=m12, 8=m13, 9=m23.
_TET_CHILDREN = np.array([
    [0, 4, 5, 6],
    [4, 1, 7, 8],
    [5, 7, 2, 9],
    [6, 8, 9, 3],
    [4, 5, 6, 8],
    [4, 5, 7, 8],
    [5, 6, 8, 9],
    [5, 7, 8, 9],
])

_TRI_EDGES = [(0, 1), (1, 2), (0, 2)]
_TET_EDGES = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _edge_index(edges: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Row index of each (sorted) vertex pair in the sorted unique edge table."""
    keys = np.sort(pairs, axis=1)
    nv = int(max(edges.max(), keys.max())) + 1
    table = edges[:, 0] * nv + edges[:, 1]
    idx = np.searchsorted(table, keys[:, 0] * nv + keys[:, 1])
    if np.any(idx >= len(table)) or np.any(table[np.minimum(idx, len(table) - 1)] != keys[:, 0] * nv + keys[:, 1]):
        raise MeshError("facet edge not found among element edges; mesh is not conforming")
    return idx


def _refine_facets(facets: np.ndarray, mid) -> np.ndarray:
    if facets.size == 0:
        return facets.reshape(0, facets.shape[1])
    if facets.shape[1] == 2:
        m = mid(facets[:, [0, 1]])
        return np.concatenate([
            np.column_stack([facets[:, 0], m]),
            np.column_stack([m, facets[:, 1]]),
        ])
    a, b, c = facets[:, 0], facets[:, 1], facets[:, 2]
    mab = mid(facets[:, [0, 1]])
    mbc = mid(facets[:, [1, 2]])
    mac = mid(facets[:, [0, 2]])
    return np.concatenate([
        np.column_stack([a, mab, mac]),
        np.column_stack([mab, b, mbc]),
        np.column_stack([mac, mbc, c]),
        np.column_stack([mab, mbc, mac]),
    ])


# Red refinement; new vertices are appended after the coarse ones (vertex nesting).
def refine_uniform(level: MeshLevel) -> MeshLevel:
    """Split every simplex into 2^d children through its edge midpoints."""
    check_conforming(level)
    d = level.dim
    nv = level.n_vertices
    edges = level.edges()
    midpoints = 0.5 * (level.coords[edges[:, 0]] + level.coords[edges[:, 1]])
    coords = np.vstack([level.coords, midpoints])

    def mid(pairs: np.ndarray) -> np.ndarray:
        return nv + _edge_index(edges, pairs)

    local_edges = _TRI_EDGES if d == 2 else _TET_EDGES
    children = _TRI_CHILDREN if d == 2 else _TET_CHILDREN
    s = level.simplices
    local = np.column_stack([s] + [mid(s[:, [a, b]]) for a, b in local_edges])
    simplices = np.concatenate([local[:, child] for child in children])
    n_children = children.shape[0]
    elem_parent = np.tile(np.arange(level.n_elements), n_children)
    subdomain = level.elem_subdomain[elem_parent]

    boundary = _refine_facets(level.boundary_facets, mid)
    n_split = boundary.shape[0] // max(level.boundary_facets.shape[0], 1)
    labels = np.tile(level.boundary_labels, n_split) if boundary.size else level.boundary_labels

    fine = build_level(
        coords,
        simplices,
        subdomain,
        boundary_facets=boundary,
        boundary_labels=labels,
        provenance=RefinementMap(n_coarse=nv, edge_parents=edges, elem_parent=elem_parent),
    )
    expected = level.interface_facets.shape[0] * 2 ** (d - 1)
    if fine.interface_facets.shape[0] != expected:
        raise MeshError(f"interface refined into {fine.interface_facets.shape[0]} facets, expected {expected}")
    logger.debug("refined level: %d -> %d vertices, %d -> %d simplices",
                 nv, fine.n_vertices, level.n_elements, fine.n_elements)
    return fine
