from .assembly import (
    DiffusionSystem,
    assemble_diffusion,
    assemble_elasticity,
    assemble_elasticity_matrix,
    assemble_laplace,
    assemble_mass,
    element_geometry,
    mass_element_matrix,
)
from .boundary import (
    BoundaryConditionSet,
    Dirichlet,
    LinearSystem,
    Neumann,
    SlidingNormal,
    apply_sliding_bcs,
    diffusion_bcs,
    dirichlet_dofs,
    elasticity_bcs,
    neumann_load,
    sliding_bcs,
)
from .schemas import MaterialCoefficients

__all__ = [
    "BoundaryConditionSet",
    "DiffusionSystem",
    "Dirichlet",
    "LinearSystem",
    "MaterialCoefficients",
    "Neumann",
    "SlidingNormal",
    "apply_sliding_bcs",
    "assemble_diffusion",
    "assemble_elasticity",
    "assemble_elasticity_matrix",
    "assemble_laplace",
    "assemble_mass",
    "diffusion_bcs",
    "dirichlet_dofs",
    "elasticity_bcs",
    "element_geometry",
    "mass_element_matrix",
    "neumann_load",
    "sliding_bcs",
]
