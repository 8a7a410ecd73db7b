from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from modules.mesh.level import OUT


def lame_elliptic(lam: float, mu: float, dim: int = 2) -> bool:
    """Positive shear modulus and bulk modulus lambda + 2 mu / d."""
    return mu > 0 and lam + 2.0 * mu / dim > 0


# Piecewise-constant material data, one value per region
class MaterialCoefficients(BaseModel):
    """Diffusivity and Lamé parameters of the outer region and the inclusions.

    The schema accepts every pair elliptic in 2D; ``require_elliptic`` adds the
    stricter 3D bound once the mesh dimension is known.
    """
    model_config = ConfigDict(frozen=True)

    k_out: float = Field(1.0, gt=0)
    k_int: float = Field(0.001, gt=0)
    lambda_out: float = 0.01
    lambda_int: float = 0.01
    mu_out: float = Field(0.1, gt=0)
    mu_int: float = Field(0.1, gt=0)

    @model_validator(mode="after")
    def _elliptic(self):
        self.require_elliptic(2)
        return self

    def require_elliptic(self, dim: int) -> None:
        for lam, mu, where in ((self.lambda_out, self.mu_out, "out"), (self.lambda_int, self.mu_int, "int")):
            if not lame_elliptic(lam, mu, dim):
                raise ValueError(f"Lamé pair ({lam}, {mu}) of region '{where}' is not elliptic in {dim}D")

    @classmethod
    def uniform_lame(cls, lam: float, mu: float) -> "MaterialCoefficients":
        return cls(lambda_out=lam, lambda_int=lam, mu_out=mu, mu_int=mu)

    def per_element(self, subdomain: np.ndarray, name: str) -> np.ndarray:
        """Element-wise value of coefficient ``name`` ("k", "lambda" or "mu")."""
        out, inside = getattr(self, f"{name}_out"), getattr(self, f"{name}_int")
        return np.where(subdomain == OUT, out, inside).astype(float)
