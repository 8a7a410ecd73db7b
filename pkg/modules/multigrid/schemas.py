from typing import Literal

from pydantic import BaseModel, ConfigDict, Field


# Linear solver settings shared by every PDE solve
class SolverSettings(BaseModel):
    """Multigrid-preconditioned CG (or a sparse direct reference solve)."""
    model_config = ConfigDict(frozen=True)

    method: Literal["mg", "direct"] = "mg"
    rtol: float = Field(1e-10, gt=0, lt=1)
    maxit: int = Field(300, ge=1)
    pre_sweeps: int = Field(2, ge=1)
    post_sweeps: int = Field(2, ge=1)
