from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.spatial.distance import cdist

from core.errors import FitError

logger = logging.getLogger(__name__)

# Relative ridge used when the caller does not ask for one
DEFAULT_RIDGE = 1e-10
# Largest singular value ratio accepted for an unregularized fit
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class RbfField:
    """Sum of Gaussians w_j exp(-eps^2 |x - c_j|^2)."""
    centers: np.ndarray
    eps: float
    weights: np.ndarray
    rms_residual: float = 0.0

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return eval_rbf(self, points)


def gaussian_kernel(points: np.ndarray, centers: np.ndarray, eps: float) -> np.ndarray:
    return np.exp(-(eps ** 2) * cdist(np.atleast_2d(points), np.atleast_2d(centers), "sqeuclidean"))


def lattice_centers(lo: Sequence[float], hi: Sequence[float], per_axis: int) -> np.ndarray:
    axes = [np.linspace(a, b, per_axis) for a, b in zip(lo, hi)]
    grid = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in grid])


# eps * spacing of flat Gaussians; the ridge keeps the fit stable
FLAT_WIDTH = 0.25


def default_eps(spacing: float) -> float:
    """Shape parameter for a center lattice of the given spacing."""
    return FLAT_WIDTH / spacing


# Regularized least squares: min |Phi w - v|^2 + alpha |w|^2, alpha = ridge * mean(diag(Phi^T Phi)).
def fit_rbf(
    points: np.ndarray,
    values: np.ndarray,
    centers: np.ndarray,
    eps: float,
    ridge: float = DEFAULT_RIDGE,
) -> RbfField:
    points = np.atleast_2d(np.asarray(points, float))
    values = np.asarray(values, float).ravel()
    centers = np.atleast_2d(np.asarray(centers, float))
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    if len(points) != len(values):
        raise ValueError(f"{len(points)} sample points but {len(values)} values")
    if len(np.unique(centers, axis=0)) != len(centers):
        raise ValueError("RBF centers must be distinct")

    phi = gaussian_kernel(points, centers, eps)
    alpha = ridge * float(np.mean(np.einsum("ij,ij->j", phi, phi)))
    if alpha > 0:
        system = np.vstack([phi, np.sqrt(alpha) * np.eye(len(centers))])
        rhs = np.concatenate([values, np.zeros(len(centers))])
    else:
        system, rhs = phi, values
    weights, _, rank, sv = sla.lstsq(system, rhs)
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else np.inf
    if alpha == 0 and (rank < len(centers) or cond > MAX_CONDITION):
        raise FitError(f"RBF system is ill-conditioned (rank {rank}/{len(centers)}, condition {cond:.2e}); use a ridge")

    rms = float(np.sqrt(np.mean((phi @ weights - values) ** 2)))
    logger.debug("RBF fit: %d samples, %d centers, eps=%.4g, rms=%.3e", len(points), len(centers), eps, rms)
    return RbfField(centers=centers, eps=float(eps), weights=weights, rms_residual=rms)


def eval_rbf(field: RbfField, points: np.ndarray) -> np.ndarray:
    return gaussian_kernel(points, field.centers, field.eps) @ field.weights
