from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from core.errors import SolverError

logger = logging.getLogger(__name__)

Preconditioner = Callable[[np.ndarray], np.ndarray]


@dataclass
class PcgResult:
    x: np.ndarray
    iterations: int
    converged: bool
    residual: float

    def __iter__(self):
        yield self.x
        yield self.iterations


def jacobi(A: sp.spmatrix) -> Preconditioner:
    inv_diag = 1.0 / sp.csr_matrix(A).diagonal()
    return lambda r: inv_diag * r


def pcg(
    A,
    b: np.ndarray,
    precond: Optional[Preconditioner] = None,
    rtol: float = 1e-10,
    maxit: int = 300,
    x0: Optional[np.ndarray] = None,
) -> PcgResult:
    """Preconditioned conjugate gradients.

    Stops when sqrt(r.Mr / b.Mb) <= rtol. Non-positive curvature p.Ap or a
    negative r.Mr raises SolverError, since either means A or M is not SPD.
    """
    M = precond if precond is not None else (lambda r: r)
    b = np.asarray(b, dtype=float)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    r = b - A @ x if x0 is not None else b.copy()
    z = M(r)
    rz = float(r @ z)
    ref = float(b @ M(b)) if x0 is not None else rz
    if ref <= 0.0:
        if ref < 0.0:
            raise SolverError("preconditioner is not positive definite", iterations=0)
        return PcgResult(x, 0, True, 0.0)
    if rz <= 0.0:
        return PcgResult(x, 0, True, 0.0)

    p = z.copy()
    rel = np.sqrt(rz / ref)
    for k in range(1, maxit + 1):
        Ap = A @ p
        curvature = float(p @ Ap)
        if curvature <= 0.0:
            raise SolverError(f"PCG breakdown: non-positive curvature {curvature:.3e} at iteration {k}",
                              iterations=k, residual=rel)
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * Ap
        z = M(r)
        rz_new = float(r @ z)
        if rz_new < 0.0:
            raise SolverError("PCG breakdown: preconditioner is not positive definite", iterations=k, residual=rel)
        rel = np.sqrt(rz_new / ref)
        if rel <= rtol:
            return PcgResult(x, k, True, float(rel))
        p = z + (rz_new / rz) * p
        rz = rz_new
    logger.warning("PCG reached maxit=%d with relative residual %.3e", maxit, rel)
    return PcgResult(x, maxit, False, float(rel))
