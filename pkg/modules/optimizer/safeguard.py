from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from core.errors import MeshValidityFailure
from modules.mesh.level import MeshLevel

logger = logging.getLogger(__name__)


def local_min_edge(level: MeshLevel) -> np.ndarray:
    """Shortest incident edge length per vertex."""
    edges = level.edges()
    lengths = level.edge_lengths()
    out = np.full(level.n_vertices, np.inf)
    np.minimum.at(out, edges[:, 0], lengths)
    np.minimum.at(out, edges[:, 1], lengths)
    return out


def safeguard_scale(
    U: np.ndarray,
    level: MeshLevel,
    s0: Optional[float] = None,
    beta: float = 0.5,
    gamma: float = 0.3,
    max_backtracks: int = 30,
) -> float:
    """Largest s0 * beta**k keeping vertex moves below gamma * local min edge with valid simplices.

    The default s0 moves the fastest vertex by gamma times the global shortest edge.
    """
    d = level.dim
    U = np.asarray(U, float).reshape(level.n_vertices, d)
    speed = np.linalg.norm(U, axis=1)
    if not np.any(speed):
        return 1.0 if s0 is None else s0
    lmin = local_min_edge(level)
    if s0 is None:
        s0 = gamma * float(lmin.min()) / float(speed.max())
    s = s0
    moving = speed > 0
    for k in range(max_backtracks + 1):
        if np.all(s * speed[moving] <= gamma * lmin[moving] * (1 + 1e-12)):
            if np.all(level.signed_volumes(level.coords + s * U) > 0):
                if k:
                    logger.debug("safeguard: scale %.3e after %d reductions", s, k)
                return s
        s *= beta
    raise MeshValidityFailure(f"no valid step scale within {max_backtracks} reductions of {s0:.3e}")
