from pydantic import BaseModel, ConfigDict, Field, model_validator

from modules.fem.schemas import lame_elliptic


# Lamé pair of the deformation metric, independent of the physical materials
class MetricSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    lam: float = Field(0.01, description="first Lamé parameter of the metric")
    mu: float = Field(0.1, gt=0, description="shear modulus of the metric")

    @model_validator(mode="after")
    def _elliptic(self):
        self.require_elliptic(2)
        return self

    def require_elliptic(self, dim: int) -> None:
        if not lame_elliptic(self.lam, self.mu, dim):
            raise ValueError(f"metric Lamé pair ({self.lam}, {self.mu}) is not elliptic in {dim}D")
