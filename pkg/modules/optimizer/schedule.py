from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

logger = logging.getLogger(__name__)


@dataclass
class RegularizationSchedule:
    """Perimeter weight over the iterations: nu4_initial until the switch, nu4_after from then on.

    With ``level_scaling`` the weight is multiplied by h / base_h of the finest level.
    """
    nu4_initial: float
    switch_iteration: Optional[int] = None
    nu4_after: float = 0.0
    level_scaling: bool = False
    base_h: Optional[float] = None
    switched: bool = False

    def __post_init__(self):
        if self.nu4_initial < 0 or self.nu4_after < 0:
            raise ValueError("perimeter weights must be non-negative")

    def scale(self, h: float) -> float:
        if not self.level_scaling or self.base_h is None:
            return 1.0
        return h / self.base_h

    def nu4(self, iteration: int, h: float = 1.0) -> float:
        """Weight in force for ``iteration``; flips the switch the first time it is reached."""
        if self.switch_iteration is not None and iteration >= self.switch_iteration and not self.switched:
            self.switched = True
            logger.info("iteration %d: perimeter weight %.4g -> %.4g", iteration, self.nu4_initial, self.nu4_after)
        base = self.nu4_after if self.switched else self.nu4_initial
        return base * self.scale(h)
