"""Limited-memory BFGS in a general inner product (two-loop recursion)."""
from __future__ import annotations

import logging
from collections import deque
from typing import Callable, Deque, Tuple

import numpy as np

logger = logging.getLogger(__name__)

Inner = Callable[[np.ndarray, np.ndarray], float]


class LbfgsMemory:
    """Up to ``size`` pairs (s, y) of steps and gradient differences.

    Gradients are Riesz representatives in the metric ``inner``; pairs with
    inner(s, y) <= 0 are rejected.
    """

    def __init__(self, inner: Inner, size: int = 5):
        self.inner = inner
        self.size = size
        self.pairs: Deque[Tuple[np.ndarray, np.ndarray, float]] = deque(maxlen=size)

    def __len__(self) -> int:
        return len(self.pairs)

    def clear(self) -> None:
        self.pairs.clear()

    def store(self, s: np.ndarray, y: np.ndarray) -> bool:
        sy = self.inner(s, y)
        if not np.isfinite(sy) or sy <= 1e-14 * np.sqrt(self.inner(s, s) * self.inner(y, y)):
            logger.warning("discarding L-BFGS pair with curvature <s, y> = %.3e", sy)
            return False
        self.pairs.append((np.array(s, float), np.array(y, float), sy))
        return True

    def apply(self, g: np.ndarray) -> np.ndarray:
        """Inverse-Hessian approximation applied to the gradient representative ``g``."""
        q = np.array(g, dtype=float)
        if not self.pairs:
            return q
        alphas = []
        for s, y, sy in reversed(self.pairs):
            a = self.inner(s, q) / sy
            q -= a * y
            alphas.append(a)
        s, y, sy = self.pairs[-1]
        r = (sy / self.inner(y, y)) * q
        for (s, y, sy), a in zip(self.pairs, reversed(alphas)):
            beta = self.inner(y, r) / sy
            r += (a - beta) * s
        return r

    def direction(self, g: np.ndarray) -> np.ndarray:
        return -self.apply(g)
