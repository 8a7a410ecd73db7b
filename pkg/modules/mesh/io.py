from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from core.errors import MeshError

from .level import MeshLevel, build_level, facet_normals

logger = logging.getLogger(__name__)

# VTK legacy cell type ids
_VTK_TRIANGLE = 5
_VTK_TETRA = 10


def _fmt(x: float) -> str:
    return repr(float(x))


# Write "dim nv ne nbf nif" followed by vertex, element, boundary and interface blocks.
def write_mesh(level: MeshLevel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{level.dim} {level.n_vertices} {level.n_elements} "
             f"{len(level.boundary_facets)} {len(level.interface_facets)}"]
    lines += [" ".join(_fmt(c) for c in row) for row in level.coords]
    lines += [" ".join(str(int(v)) for v in s) + f" {int(lab)}"
              for s, lab in zip(level.simplices, level.elem_subdomain)]
    lines += [" ".join(str(int(v)) for v in f) + f" {lab}"
              for f, lab in zip(level.boundary_facets, level.boundary_labels)]
    # stored facets are already oriented out of the inclusion
    lines += [" ".join(str(int(v)) for v in f) + " 1" for f in level.interface_facets]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_mesh(path: str | Path) -> MeshLevel:
    """Parse the ASCII mesh format; interface facets are re-derived and cross-checked."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"mesh file not found: {path}")
    rows = [ln.split() for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    try:
        dim, nv, ne, nbf, nif = (int(t) for t in rows[0])
        body = rows[1:]
        coords = np.array([[float(t) for t in r] for r in body[:nv]])
        elems = body[nv:nv + ne]
        simplices = np.array([[int(t) for t in r[: dim + 1]] for r in elems], dtype=np.int64)
        subdomain = np.array([int(r[dim + 1]) for r in elems], dtype=np.int64)
        bnd = body[nv + ne: nv + ne + nbf]
        bfacets = np.array([[int(t) for t in r[:dim]] for r in bnd], dtype=np.int64).reshape(-1, dim)
        blabels = np.array([r[dim] for r in bnd], dtype=str)
        itf = body[nv + ne + nbf: nv + ne + nbf + nif]
        ifacets = np.array([[int(t) for t in r[:dim]] for r in itf], dtype=np.int64).reshape(-1, dim)
        iflags = np.array([int(r[dim]) for r in itf], dtype=np.int64)
    except (ValueError, IndexError) as exc:
        raise MeshError(f"malformed mesh file {path}: {exc}") from exc
    if coords.shape != (nv, dim) or len(body) < nv + ne + nbf + nif:
        raise MeshError(f"mesh file {path} is truncated")

    level = build_level(coords, simplices, subdomain, boundary_facets=bfacets, boundary_labels=blabels)

    # flag -1 means the listed order points into the inclusion
    flipped = ifacets.copy()
    neg = iflags < 0
    flipped[neg, 0], flipped[neg, 1] = ifacets[neg, 1], ifacets[neg, 0]
    given = {tuple(sorted(f)) for f in flipped.tolist()}
    derived = {tuple(sorted(f)) for f in level.interface_facets.tolist()}
    if given != derived:
        raise MeshError(f"interface facets in {path} do not match the subdomain labels")
    if len(flipped):
        lookup = {tuple(sorted(f)): k for k, f in enumerate(level.interface_facets.tolist())}
        idx = np.array([lookup[tuple(sorted(f))] for f in flipped.tolist()])
        agree = np.einsum("ij,ij->i", facet_normals(level.coords, flipped), level.interface_normals()[idx])
        if np.any(agree <= 0):
            raise MeshError(f"interface orientation flags in {path} contradict the subdomain labels")
    return level


def write_vtk(
    level: MeshLevel,
    path: str | Path,
    point_data: Optional[Dict[str, np.ndarray]] = None,
    title: str = "shapeopt mesh",
) -> Path:
    """Legacy ASCII VTK unstructured grid with subdomain cell data."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    d = level.dim
    nb = d + 1
    cell_type = _VTK_TRIANGLE if d == 2 else _VTK_TETRA
    pts = level.coords if d == 3 else np.column_stack([level.coords, np.zeros(level.n_vertices)])

    out = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {level.n_vertices} double"]
    out += [" ".join(_fmt(c) for c in p) for p in pts]
    out.append(f"CELLS {level.n_elements} {level.n_elements * (nb + 1)}")
    out += [f"{nb} " + " ".join(str(int(v)) for v in s) for s in level.simplices]
    out.append(f"CELL_TYPES {level.n_elements}")
    out += [str(cell_type)] * level.n_elements
    out += [f"CELL_DATA {level.n_elements}", "SCALARS subdomain int 1", "LOOKUP_TABLE default"]
    out += [str(int(v)) for v in level.elem_subdomain]

    if point_data:
        out.append(f"POINT_DATA {level.n_vertices}")
        for name, values in point_data.items():
            values = np.asarray(values, dtype=float)
            if values.ndim == 1:
                out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
                out += [_fmt(v) for v in values]
            else:
                vec = values.reshape(level.n_vertices, -1)
                if vec.shape[1] == 2:
                    vec = np.column_stack([vec, np.zeros(level.n_vertices)])
                out.append(f"VECTORS {name} double")
                out += [" ".join(_fmt(c) for c in row) for row in vec]
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    logger.debug("wrote %s", path)
    return path
