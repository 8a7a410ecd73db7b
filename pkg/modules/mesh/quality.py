from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .level import MeshLevel, facet_measures

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QualitySummary:
    """Aspect ratio statistics of one level (1.0 is the regular simplex)."""
    min: float
    max: float
    mean: float
    degenerate: List[int] = field(default_factory=list)

    def as_row(self) -> dict:
        return {"aspect_min": self.min, "aspect_max": self.max, "aspect_mean": self.mean,
                "degenerate": len(self.degenerate)}


def circumradii(coords: np.ndarray, simplices: np.ndarray) -> np.ndarray:
    d = coords.shape[1]
    x0 = coords[simplices[:, 0]]
    A = np.stack([coords[simplices[:, k]] - x0 for k in range(1, d + 1)], axis=1)
    rhs = 0.5 * np.einsum("eij,eij->ei", A, A)
    with np.errstate(all="ignore"):
        center = np.linalg.solve(A, rhs[..., None])[..., 0]
    return np.linalg.norm(center, axis=1)


def inradii(coords: np.ndarray, simplices: np.ndarray, volumes: np.ndarray) -> np.ndarray:
    d = coords.shape[1]
    nb = d + 1
    loc = np.arange(nb)
    area = sum(facet_measures(coords, simplices[:, np.delete(loc, k)]) for k in range(nb))
    return d * volumes / area


def aspect_ratios(level: MeshLevel) -> np.ndarray:
    """circumradius / (d * inradius) per simplex; inf where the simplex is flat."""
    vol = np.abs(level.signed_volumes())
    scale = level.h ** level.dim
    flat = vol <= 1e-12 * scale
    ratios = np.full(level.n_elements, np.inf)
    ok = ~flat
    if np.any(ok):
        s = level.simplices[ok]
        R = circumradii(level.coords, s)
        r = inradii(level.coords, s, vol[ok])
        ratios[ok] = R / (level.dim * r)
    return ratios


def mesh_quality(level: MeshLevel) -> QualitySummary:
    ratios = aspect_ratios(level)
    degenerate = np.flatnonzero(~np.isfinite(ratios))
    if degenerate.size:
        logger.warning("%d degenerate simplices, first %s", degenerate.size, degenerate[:5].tolist())
    return QualitySummary(
        min=float(ratios.min()),
        max=float(ratios.max()),
        mean=float(ratios.mean()),
        degenerate=degenerate.tolist(),
    )
