"""Exception hierarchy shared by all shapeopt modules.

Numerical failures derive from ``ShapeOptError`` and map to exit code 2 in the
CLI; argument misuse raises plain ``ValueError`` and maps to exit code 1.
"""
from __future__ import annotations

from typing import Optional, Sequence


class ShapeOptError(Exception):
    """Base class for numerical and geometric failures."""


class MeshError(ShapeOptError):
    """Non-conforming, malformed or otherwise unusable mesh input."""


class InvalidDeformationError(MeshError):
    """A deformation produced simplices with non-positive signed volume."""

    def __init__(self, message: str, elements: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.elements = [] if elements is None else [int(e) for e in elements]


class BoundaryConditionError(ShapeOptError):
    """Missing or inconsistent boundary conditions."""


class SolverError(ShapeOptError):
    """Iterative solver breakdown or non-convergence."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularOperatorError(SolverError):
    """Coarse-level factorization failed; the operator has a (near) null space."""

    def __init__(self, message: str, null_space_hint: str = ""):
        super().__init__(message)
        self.null_space_hint = null_space_hint


class FitError(ShapeOptError):
    """Radial basis function fit could not be computed reliably."""


class TrajectoryError(ShapeOptError):
    """Transient trajectories with mismatching time grids or lengths."""


class ObjectiveError(ShapeOptError):
    """Objective evaluation requested without the states it needs."""


class MeshValidityFailure(ShapeOptError):
    """No admissible step scale keeps the mesh valid; the optimization halts."""


# Exit codes used by the command line front end
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
