from .curvature import CurvatureField, discrete_mean_curvature
from .generators import (
    lattice_polygons,
    polygon_inclusions,
    reference_triangle,
    regular_polygon,
    square_inclusion,
    star_polygon,
    structured_box,
    unit_square_two_triangles,
)
from .hierarchy import (
    SimplicialMeshHierarchy,
    deform_all_levels,
    prolongation_matrix,
    radial_projection,
    snap_interface,
)
from .io import read_mesh, write_mesh, write_vtk
from .level import OUT, MeshLevel, RefinementMap, build_level, side_labels
from .quality import QualitySummary, aspect_ratios, mesh_quality
from .refine import refine_uniform

__all__ = [
    "OUT",
    "CurvatureField",
    "MeshLevel",
    "QualitySummary",
    "RefinementMap",
    "SimplicialMeshHierarchy",
    "aspect_ratios",
    "build_level",
    "deform_all_levels",
    "discrete_mean_curvature",
    "lattice_polygons",
    "mesh_quality",
    "polygon_inclusions",
    "prolongation_matrix",
    "radial_projection",
    "read_mesh",
    "reference_triangle",
    "refine_uniform",
    "regular_polygon",
    "side_labels",
    "snap_interface",
    "square_inclusion",
    "star_polygon",
    "structured_box",
    "unit_square_two_triangles",
    "write_mesh",
    "write_vtk",
]
