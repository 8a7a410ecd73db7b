from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


# Outer loop settings: direction, globalization, stopping and the nu4 schedule
class OptimizerSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["gradient_descent", "lbfgs"] = "gradient_descent"
    memory: int = Field(5, ge=1, le=5, description="stored (s, y) pairs")
    max_iter: int = Field(30, ge=0)
    gs_tol: float = Field(1e-6, ge=0, description="absolute stopping tolerance on the gradient norm")
    gs_rtol: float = Field(0.0, ge=0, lt=1, description="stop once gs_norm <= gs_rtol * initial gs_norm")
    armijo: bool = True
    armijo_c: float = Field(1e-4, gt=0, lt=1)
    backtrack: float = Field(0.5, gt=0, lt=1, description="step reduction factor")
    max_backtracks: int = Field(20, ge=0)
    max_displacement: float = Field(0.3, gt=0, description="max vertex move as a fraction of the local min edge")
    initial_scale: Optional[float] = Field(None, gt=0, description="fixed first trial scale; default from max_displacement")
    nu4_switch_iteration: Optional[int] = Field(None, ge=0)
    nu4_after: float = Field(0.0, ge=0)
    nu4_level_scaling: bool = False
    nu4_base_h: Optional[float] = Field(None, gt=0, description="reference mesh size of the level scaling")
