from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


# Weights and time data of J = j1 + j2 + j3 + j4
class ObjectiveSpec(BaseModel):
    """Objective weights, loading and time horizon."""
    model_config = ConfigDict(frozen=True)

    nu1: float = Field(0.0, ge=0, description="compliance weight")
    nu2: float = Field(0.0, ge=0, description="tracking weight")
    nu3: float = Field(0.0, ge=0, description="outer volume weight")
    nu4: float = Field(0.0, ge=0, description="perimeter weight")
    f_top: Tuple[float, ...] = (0.0, -1.0)
    T: float = Field(15.0, gt=0)
    dt: float = Field(1.5, gt=0)
    measurement_mode: Literal["integral", "instants"] = "instants"
    instants: Optional[List[float]] = None
    perimeter_form: Literal["surface", "volume"] = "surface"

    @model_validator(mode="after")
    def _time_grid(self):
        n = round(self.T / self.dt)
        if n < 1 or abs(n * self.dt - self.T) > 1e-9 * self.T:
            raise ValueError(f"dt={self.dt} must divide T={self.T}")
        return self

    @property
    def measurement_instants(self) -> List[float]:
        return list(self.instants) if self.instants else [0.5 * self.T, self.T]

    def weights(self) -> dict:
        return {"j1": self.nu1, "j2": self.nu2, "j3": self.nu3, "j4": self.nu4}

    def only(self, name: str) -> "ObjectiveSpec":
        """Copy with every weight but ``name`` set to zero."""
        zeros = {k: 0.0 for k in ("nu1", "nu2", "nu3", "nu4")}
        zeros[f"nu{name[-1]}"] = self.weights()[name]
        return self.model_copy(update=zeros)
