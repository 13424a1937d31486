import numpy as np
import pytest

from tcm2d.grid import RealField, forward, make_grid


@pytest.fixture
def grid2pi():
    return make_grid(32, 2 * np.pi)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def field_from(grid, fn):
    """Sample ``fn(x1, x2)`` on the grid and transform; ``fn`` may return a pair for vectors."""
    x1, x2 = grid.coords()
    vals = fn(x1, x2)
    if isinstance(vals, tuple):
        vals = np.stack([np.broadcast_to(v, grid.shape) for v in vals])
    else:
        vals = np.broadcast_to(vals, grid.shape).copy()
    return forward(RealField(grid, np.array(vals, dtype=float)))
