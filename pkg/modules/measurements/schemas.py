from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class RbfSettings(BaseModel):
    """Center lattice, Gaussian width and ridge of the measurement fits."""
    model_config = ConfigDict(frozen=True)

    centers_per_axis: int = Field(12, ge=1)
    eps: Optional[float] = Field(None, gt=0, description="defaults to 0.25 / lattice spacing")
    ridge: float = Field(1e-10, ge=0)


class MeasurementConfig(BaseModel):
    """Where the reference data comes from and how it is represented."""
    source: Literal["rbf", "exact"] = "rbf"
    instants: Optional[List[float]] = Field(None, description="measurement times; default [T/2, T]")
    rbf: RbfSettings = RbfSettings()
