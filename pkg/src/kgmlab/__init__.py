"""Numerical laboratory for the electrostatic Klein-Gordon-Maxwell-Proca
system on radially symmetric model manifolds."""

__version__ = "0.1.0"

from .model import (Field, Geometry, GeometryKind, Params, RadialGrid,
                    build_grid, integrate, sphere_area)

__all__ = [
    "Field", "Geometry", "GeometryKind", "Params", "RadialGrid",
    "build_grid", "integrate", "sphere_area", "__version__",
]
