from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from core.errors import MeshError

logger = logging.getLogger(__name__)

OUT = 0

# Box face labels by (axis, side); "top" is the max of the last axis.
FACE_LABELS_2D = {(0, 0): "left", (0, 1): "right", (1, 0): "bottom", (1, 1): "top"}
FACE_LABELS_3D = {
    (0, 0): "left", (0, 1): "right",
    (1, 0): "front", (1, 1): "back",
    (2, 0): "bottom", (2, 1): "top",
}


def face_labels(dim: int) -> Dict[Tuple[int, int], str]:
    return FACE_LABELS_2D if dim == 2 else FACE_LABELS_3D


def side_labels(dim: int) -> Tuple[str, ...]:
    return ("left", "right") if dim == 2 else ("left", "right", "front", "back")


@dataclass(frozen=True)
class RefinementMap:
    """Provenance of a refined level relative to its parent.

    Vertex ``i < n_coarse`` of the fine level is the coarse vertex ``i``; every
    later vertex is the midpoint of ``edge_parents[i - n_coarse]``.
    """
    n_coarse: int
    edge_parents: np.ndarray
    elem_parent: np.ndarray


@dataclass(frozen=True)
class MeshLevel:
    """One conforming simplicial level of the hold-all box.

    Attributes:
        coords: (nv, d) vertex positions.
        simplices: (ne, d+1) positively oriented vertex tuples.
        elem_subdomain: (ne,) 0 for the outer region, i >= 1 for inclusion i.
        boundary_facets: (nb, d) facets on the box boundary.
        boundary_labels: (nb,) face label of each boundary facet.
        interface_facets: (ni, d) facets between an inclusion and the outer region,
            ordered so that the facet normal points out of the inclusion.
        interface_owner: (ni,) inclusion-side element of each interface facet.
        provenance: refinement map relative to the parent level, if refined.
    """
    coords: np.ndarray
    simplices: np.ndarray
    elem_subdomain: np.ndarray
    boundary_facets: np.ndarray
    boundary_labels: np.ndarray
    interface_facets: np.ndarray
    interface_owner: np.ndarray
    provenance: Optional[RefinementMap] = field(default=None, compare=False)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[1])

    @property
    def n_vertices(self) -> int:
        return int(self.coords.shape[0])

    @property
    def n_elements(self) -> int:
        return int(self.simplices.shape[0])

    @property
    def interface_region(self) -> np.ndarray:
        return self.elem_subdomain[self.interface_owner]

    def signed_volumes(self, coords: Optional[np.ndarray] = None) -> np.ndarray:
        return signed_volumes(self.coords if coords is None else coords, self.simplices)

    def edges(self) -> np.ndarray:
        return unique_edges(self.simplices)

    def edge_lengths(self) -> np.ndarray:
        e = self.edges()
        return np.linalg.norm(self.coords[e[:, 1]] - self.coords[e[:, 0]], axis=1)

    @property
    def h(self) -> float:
        return float(self.edge_lengths().max())

    def interface_vertices(self) -> np.ndarray:
        return np.unique(self.interface_facets)

    def boundary_vertices(self, label: str) -> np.ndarray:
        return np.unique(self.boundary_facets[self.boundary_labels == label])

    def subdomain_volume(self, region: Optional[int] = None) -> float:
        vol = self.signed_volumes()
        if region is None:
            return float(vol.sum())
        return float(vol[self.elem_subdomain == region].sum())

    def outer_volume(self) -> float:
        return self.subdomain_volume(OUT)

    def interface_measure(self) -> float:
        return float(facet_measures(self.coords, self.interface_facets).sum())

    def interface_normals(self) -> np.ndarray:
        return facet_normals(self.coords, self.interface_facets)

    def with_coords(self, coords: np.ndarray) -> "MeshLevel":
        """Same topology and labels at new vertex positions."""
        if coords.shape != self.coords.shape:
            raise ValueError(f"coords shape {coords.shape} does not match {self.coords.shape}")
        return replace(self, coords=np.array(coords, dtype=float))


# ---------------------------------------------------------------------------
# Geometry helpers shared by all levels

def signed_volumes(coords: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    d = coords.shape[1]
    x0 = coords[simplices[:, 0]]
    jac = np.stack([coords[simplices[:, k]] - x0 for k in range(1, d + 1)], axis=-1)
    return np.linalg.det(jac) / (2.0 if d == 2 else 6.0)


def unique_edges(simplices: np.ndarray) -> np.ndarray:
    nb = simplices.shape[1]
    pairs = [(a, b) for a in range(nb) for b in range(a + 1, nb)]
    e = np.concatenate([simplices[:, [a, b]] for a, b in pairs])
    return np.unique(np.sort(e, axis=1), axis=0)


def facet_measures(coords: np.ndarray, facets: np.ndarray) -> np.ndarray:
    if facets.size == 0:
        return np.zeros(0)
    if coords.shape[1] == 2:
        return np.linalg.norm(coords[facets[:, 1]] - coords[facets[:, 0]], axis=1)
    a = coords[facets[:, 1]] - coords[facets[:, 0]]
    b = coords[facets[:, 2]] - coords[facets[:, 0]]
    return 0.5 * np.linalg.norm(np.cross(a, b), axis=1)


def facet_normals(coords: np.ndarray, facets: np.ndarray) -> np.ndarray:
    """Unit normals induced by the vertex order of each facet."""
    if facets.size == 0:
        return np.zeros((0, coords.shape[1]))
    if coords.shape[1] == 2:
        t = coords[facets[:, 1]] - coords[facets[:, 0]]
        n = np.column_stack([t[:, 1], -t[:, 0]])
    else:
        a = coords[facets[:, 1]] - coords[facets[:, 0]]
        b = coords[facets[:, 2]] - coords[facets[:, 0]]
        n = np.cross(a, b)
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def facet_table(simplices: np.ndarray):
    """All element facets, deduplicated.

    Returns (facets, inverse, elem, local) where ``facets`` holds sorted unique
    facets, ``inverse[k]`` maps the k-th element facet to its unique row, and
    ``elem``/``local`` give the element and the local index of the opposite vertex.
    """
    ne, nb = simplices.shape
    loc = np.arange(nb)
    all_facets = np.concatenate([simplices[:, np.delete(loc, k)] for k in range(nb)])
    elem = np.tile(np.arange(ne), nb)
    local = np.repeat(loc, ne)
    facets, inverse = np.unique(np.sort(all_facets, axis=1), axis=0, return_inverse=True)
    return facets, inverse.ravel(), elem, local


def orient_simplices(coords: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    """Swap two vertices of every negatively oriented simplex."""
    simplices = np.array(simplices, dtype=np.int64)
    neg = signed_volumes(coords, simplices) < 0
    simplices[neg, 0], simplices[neg, 1] = simplices[neg, 1].copy(), simplices[neg, 0].copy()
    return simplices


def orient_facets_outward(coords: np.ndarray, facets: np.ndarray, opposite: np.ndarray) -> np.ndarray:
    """Order facet vertices so the normal points away from the opposite vertex."""
    facets = np.array(facets, dtype=np.int64)
    if facets.size == 0:
        return facets
    n = facet_normals(coords, facets)
    centroid = coords[facets].mean(axis=1)
    flip = np.einsum("ij,ij->i", n, centroid - coords[opposite]) < 0
    facets[flip, 0], facets[flip, 1] = facets[flip, 1].copy(), facets[flip, 0].copy()
    return facets


def find_interface(coords: np.ndarray, simplices: np.ndarray, subdomain: np.ndarray):
    """Facets separating an inclusion from the outer region, oriented out of the inclusion."""
    facets, inverse, elem, local = facet_table(simplices)
    nf = facets.shape[0]
    counts = np.bincount(inverse, minlength=nf)
    # first and second element incident to each unique facet
    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    first = order[starts]
    shared = counts == 2
    second = np.full(nf, -1)
    second[shared] = order[starts[shared] + 1]
    lab_a = subdomain[elem[first]]
    lab_b = np.where(shared, subdomain[elem[np.maximum(second, 0)]], -1)
    iface = shared & (lab_a != lab_b)
    if np.any(iface & (lab_a != OUT) & (lab_b != OUT)):
        raise MeshError("two inclusions share a facet; inclusions must be separated by the outer region")
    ka = first[iface]
    kb = second[iface]
    owner_k = np.where(subdomain[elem[ka]] != OUT, ka, kb)
    owner = elem[owner_k]
    opposite = simplices[owner, local[owner_k]]
    oriented = orient_facets_outward(coords, facets[iface], opposite)
    return oriented, owner


def boundary_facet_candidates(simplices: np.ndarray):
    """Facets incident to exactly one element, with that element's opposite vertex."""
    facets, inverse, elem, local = facet_table(simplices)
    counts = np.bincount(inverse, minlength=facets.shape[0])
    if np.any(counts > 2):
        raise MeshError("facet shared by more than two simplices; mesh is not a manifold complex")
    single = np.flatnonzero(counts[inverse] == 1)
    return facets[inverse[single]], simplices[elem[single], local[single]]


def label_box_faces(coords: np.ndarray, facets: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Assign box face labels by which coordinate plane a facet lies on."""
    d = coords.shape[1]
    lo, hi = coords.min(axis=0), coords.max(axis=0)
    scale = max(float((hi - lo).max()), 1.0)
    labels = np.empty(facets.shape[0], dtype=object)
    labels[:] = None
    pts = coords[facets]
    for (axis, side), name in face_labels(d).items():
        target = lo[axis] if side == 0 else hi[axis]
        on = np.all(np.abs(pts[:, :, axis] - target) <= tol * scale, axis=1)
        labels[on & (labels == None)] = name  # noqa: E711
    # facets off the box faces (e.g. a slanted hypotenuse) keep a generic label
    labels[labels == None] = "boundary"  # noqa: E711
    return labels.astype(str)


def build_level(
    coords: np.ndarray,
    simplices: np.ndarray,
    elem_subdomain: np.ndarray,
    boundary_facets: Optional[np.ndarray] = None,
    boundary_labels: Optional[np.ndarray] = None,
    provenance: Optional[RefinementMap] = None,
) -> MeshLevel:
    """Assemble a validated level, deriving whatever labels were not given."""
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[1] not in (2, 3):
        raise MeshError(f"coordinates must be (nv, 2) or (nv, 3), got {coords.shape}")
    simplices = orient_simplices(coords, np.asarray(simplices, dtype=np.int64))
    if simplices.shape[1] != coords.shape[1] + 1:
        raise MeshError("simplex arity does not match the coordinate dimension")
    elem_subdomain = np.asarray(elem_subdomain, dtype=np.int64)
    if elem_subdomain.shape != (simplices.shape[0],):
        raise MeshError("elem_subdomain must carry one label per simplex")

    candidates, opposite = boundary_facet_candidates(simplices)
    if boundary_facets is None:
        boundary_facets = orient_facets_outward(coords, candidates, opposite)
        boundary_labels = label_box_faces(coords, boundary_facets)
    else:
        boundary_facets = np.asarray(boundary_facets, dtype=np.int64)
        boundary_labels = np.asarray(boundary_labels).astype(str)
        check_boundary_cover(candidates, boundary_facets)

    interface, owner = find_interface(coords, simplices, elem_subdomain)
    level = MeshLevel(
        coords=coords,
        simplices=simplices,
        elem_subdomain=elem_subdomain,
        boundary_facets=boundary_facets,
        boundary_labels=boundary_labels,
        interface_facets=interface,
        interface_owner=owner,
        provenance=provenance,
    )
    check_positive(level)
    return level


# ---------------------------------------------------------------------------
# Validation

def check_boundary_cover(candidates: np.ndarray, boundary_facets: np.ndarray) -> None:
    """Labeled boundary facets must be exactly the single-element facets."""
    have = {tuple(f) for f in np.sort(boundary_facets, axis=1)}
    need = {tuple(f) for f in np.sort(candidates, axis=1)}
    if len(have) != len(boundary_facets):
        raise MeshError("boundary facets overlap: a facet carries more than one label")
    hanging = need - have
    if hanging:
        raise MeshError(f"mesh is not conforming: {len(hanging)} unlabeled single-element facets, e.g. {sorted(hanging)[0]}")
    extra = have - need
    if extra:
        raise MeshError(f"{len(extra)} labeled boundary facets are interior facets, e.g. {sorted(extra)[0]}")


def check_conforming(level: MeshLevel) -> None:
    candidates, _ = boundary_facet_candidates(level.simplices)
    check_boundary_cover(candidates, level.boundary_facets)


def check_positive(level: MeshLevel, coords: Optional[np.ndarray] = None) -> None:
    vol = level.signed_volumes(coords)
    bad = np.flatnonzero(vol <= 0)
    if bad.size:
        raise MeshError(f"{bad.size} simplices with non-positive signed volume, first {bad[:5].tolist()}")
