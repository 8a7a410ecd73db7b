from __future__ import annotations

import logging
from typing import List, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from core.errors import SingularOperatorError

logger = logging.getLogger(__name__)


class SymmetricGaussSeidel:
    """Forward then backward Gauss-Seidel sweeps in the fixed dof order."""

    def __init__(self, A: sp.spmatrix):
        self.A = sp.csr_matrix(A)
        # triangular factors solved without fill under the natural ordering
        self._lower = splu(sp.tril(self.A, format="csc"), permc_spec="NATURAL", diag_pivot_thresh=0.0)
        self._upper = splu(sp.triu(self.A, format="csc"), permc_spec="NATURAL", diag_pivot_thresh=0.0)

    def smooth(self, x: np.ndarray, b: np.ndarray, sweeps: int) -> np.ndarray:
        for _ in range(sweeps):
            x = x + self._lower.solve(b - self.A @ x)
            x = x + self._upper.solve(b - self.A @ x)
        return x


def _coarse_factor(A: sp.spmatrix):
    dense = A.toarray()
    try:
        return sla.cho_factor(dense, lower=True)
    except sla.LinAlgError as exc:
        eig = np.linalg.eigvalsh(dense)
        tol = 1e-12 * max(abs(eig).max(), 1.0)
        hint = f"{int(np.count_nonzero(eig <= tol))} non-positive eigenvalues of {dense.shape[0]} (min {eig.min():.3e})"
        raise SingularOperatorError(
            "coarse operator is not positive definite; check that constraints remove rigid motions or constants",
            null_space_hint=hint,
        ) from exc


class MgHierarchy:
    """Operators, prolongations and smoothers of a geometric multigrid V-cycle.

    ``operators[0]`` is the coarsest level; ``prolongations[l]`` maps level l to l+1.
    """

    def __init__(
        self,
        operators: Sequence[sp.spmatrix],
        prolongations: Sequence[sp.spmatrix],
        pre_sweeps: int = 2,
        post_sweeps: int = 2,
    ):
        if len(prolongations) != len(operators) - 1:
            raise ValueError("need exactly one prolongation between consecutive levels")
        self.operators: List[sp.csr_matrix] = [sp.csr_matrix(A) for A in operators]
        self.prolongations: List[sp.csr_matrix] = [sp.csr_matrix(P) for P in prolongations]
        self.pre_sweeps = pre_sweeps
        self.post_sweeps = post_sweeps
        self.smoothers = [SymmetricGaussSeidel(A) for A in self.operators[1:]]
        self.coarse = _coarse_factor(self.operators[0])

    @classmethod
    def galerkin(
        cls,
        fine: sp.spmatrix,
        prolongations: Sequence[sp.spmatrix],
        pre_sweeps: int = 2,
        post_sweeps: int = 2,
    ) -> "MgHierarchy":
        """Coarse operators P^T A P built down from the finest operator."""
        ops = [sp.csr_matrix(fine)]
        for P in reversed(prolongations):
            coarse = (P.T @ ops[0] @ P).tocsr()
            ops.insert(0, ((coarse + coarse.T) * 0.5).tocsr())
        return cls(ops, prolongations, pre_sweeps, post_sweeps)

    @property
    def n_levels(self) -> int:
        return len(self.operators)

    def v_cycle(self, rhs: np.ndarray, level: int | None = None) -> np.ndarray:
        """One V(pre, post) cycle from a zero initial guess."""
        level = self.n_levels - 1 if level is None else level
        if level == 0:
            return sla.cho_solve(self.coarse, rhs)
        A = self.operators[level]
        smoother = self.smoothers[level - 1]
        P = self.prolongations[level - 1]
        x = smoother.smooth(np.zeros_like(rhs), rhs, self.pre_sweeps)
        correction = self.v_cycle(P.T @ (rhs - A @ x), level - 1)
        x = x + P @ correction
        return smoother.smooth(x, rhs, self.post_sweeps)

    def __call__(self, rhs: np.ndarray) -> np.ndarray:
        return self.v_cycle(rhs)
