import numpy as np
import pytest

from modules.mesh.generators import polygon_inclusions, regular_polygon, square_inclusion, structured_box
from modules.mesh.hierarchy import SimplicialMeshHierarchy
from modules.multigrid.schemas import SolverSettings


@pytest.fixture
def square_level():
    return square_inclusion(4)


@pytest.fixture
def square_mesh():
    return SimplicialMeshHierarchy.from_coarse(square_inclusion(4), 1)


@pytest.fixture
def polygon_mesh():
    coarse = polygon_inclusions([regular_polygon((0.5, 0.5), 0.25, 16)], h=0.12)
    return SimplicialMeshHierarchy.from_coarse(coarse, 1)


@pytest.fixture
def cube_level():
    return structured_box(4, (1.0, 1.0, 1.0), [((0.25,) * 3, (0.75,) * 3)])


@pytest.fixture
def direct():
    return SolverSettings(method="direct")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
