from .diffusion import (
    TransientTrajectory,
    diffusion_system,
    instant_steps,
    march_diffusion_adjoint,
    march_diffusion_state,
    n_time_steps,
    tracking_value,
    tracking_weights,
)
from .elastic import ElasticPair, elastic_system, solve_elastic_adjoint, solve_elastic_pair, solve_elastic_state

__all__ = [
    "ElasticPair",
    "TransientTrajectory",
    "diffusion_system",
    "elastic_system",
    "instant_steps",
    "march_diffusion_adjoint",
    "march_diffusion_state",
    "n_time_steps",
    "solve_elastic_adjoint",
    "solve_elastic_pair",
    "solve_elastic_state",
    "tracking_value",
    "tracking_weights",
]
