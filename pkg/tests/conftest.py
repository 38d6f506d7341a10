import numpy as np
import pytest

from kgmlab.model import Field, Geometry, GeometryKind, build_grid


def smooth_random_field(grid, rng, kmax=6, amplitude=1.0) -> Field:
    """Random low-frequency cosine sum: smooth on any grid, deterministic
    under a seeded generator."""
    vals = np.zeros(grid.n_nodes)
    for k in range(kmax + 1):
        vals += rng.normal(0.0, 1.0 / (1 + k * k)) * np.cos(k * grid.nodes)
    return Field(grid, amplitude * vals)


@pytest.fixture
def sphere3():
    return build_grid(Geometry(GeometryKind.SPHERE, 3), 128)


@pytest.fixture
def sphere5():
    return build_grid(Geometry(GeometryKind.SPHERE, 5), 128)


@pytest.fixture
def ball5():
    return build_grid(Geometry(GeometryKind.BALL, 5, 1.0), 128)
