import numpy as np
import pytest

from conewave import FREQUENCY, GridSpec, SpaceTimeField, SpatialField


@pytest.fixture
def grid8():
    return GridSpec(nx=8, nt=8, spatial_period=2 * np.pi, time_period=2 * np.pi)


@pytest.fixture
def grid16():
    return GridSpec(nx=16, nt=16, spatial_period=2 * np.pi, time_period=2 * np.pi)


def random_field(grid, seed, rep=FREQUENCY, spatial=False):
    rng = np.random.default_rng(seed)
    shape = grid.spatial_shape if spatial else grid.shape
    vals = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    cls = SpatialField if spatial else SpaceTimeField
    return cls(grid, vals, rep)
