"""Physical parameters, model geometries, radial grids and quadrature.

Two rotationally invariant model manifolds are supported: the round unit
n-sphere (geodesic polar radius r in [0, pi], metric weight sin(r)^(n-1))
and the flat Euclidean ball (weight r^(n-1)).  Every field in the package
is a radial profile sampled on such a grid, and every integral over the
manifold reduces to a weighted sum over grid nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, GridMismatchError

# 5-point Gauss-Legendre rule used for all dual-cell quadrature.
_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


def sphere_area(k: int) -> float:
    """Volume of the unit k-sphere, 2 pi^((k+1)/2) / Gamma((k+1)/2)."""
    if k < 1:
        raise DomainError(f"sphere_area requires k >= 1, got {k}")
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


@dataclass(frozen=True)
class Params:
    """Physical constants of the coupled system.

    n     spatial dimension, n >= 3
    p     exponent of the matter nonlinearity, 2 < p <= 2n/(n-2)
    m0    matter mass, > 0
    m1    gauge (Proca) mass, > 0
    q     charge, > 0
    omega phase; the existence theory concerns |omega| < m0
    """

    n: int
    p: float
    m0: float
    m1: float
    q: float
    omega: float

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"dimension must be >= 3, got {self.n}")
        if not (2.0 < self.p <= self.critical_exponent + 1e-12):
            raise DomainError(
                f"exponent p={self.p} outside (2, {self.critical_exponent}]")
        if self.m0 <= 0 or self.m1 <= 0 or self.q <= 0:
            raise DomainError("masses m0, m1 and charge q must be positive")

    @property
    def critical_exponent(self) -> float:
        return 2.0 * self.n / (self.n - 2.0)


class GeometryKind(str, Enum):
    SPHERE = "sphere"
    BALL = "ball"


@dataclass(frozen=True)
class Geometry:
    """Rotationally invariant model manifold (round sphere or flat ball)."""

    kind: GeometryKind
    n: int
    r_max: float = 0.0  # 0.0 means "default": pi for the sphere, 1.0 for the ball

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"dimension must be >= 3, got {self.n}")
        r_max = self.r_max
        if r_max == 0.0:
            r_max = math.pi if self.kind is GeometryKind.SPHERE else 1.0
            object.__setattr__(self, "r_max", r_max)
        if self.kind is GeometryKind.SPHERE and not (0.0 < r_max <= math.pi + 1e-15):
            raise DomainError(f"sphere radius must lie in (0, pi], got {r_max}")
        if self.kind is GeometryKind.BALL and r_max <= 0.0:
            raise DomainError(f"ball radius must be positive, got {r_max}")

    @property
    def scalar_curvature(self) -> float:
        """Constant scalar curvature: n(n-1) on the round sphere, 0 on the ball."""
        return float(self.n * (self.n - 1)) if self.kind is GeometryKind.SPHERE else 0.0

    def metric_weight(self, r: np.ndarray) -> np.ndarray:
        if self.kind is GeometryKind.SPHERE:
            return np.sin(r) ** (self.n - 1)
        return r ** (self.n - 1)


@dataclass(frozen=True)
class RadialGrid:
    """Geodesic-polar mesh with metric volume weights.

    nodes        r_0 = 0 < r_1 < ... < r_N = r_max
    cell_weights W_i = area(S^{n-1}) * int over the dual cell of w(r) dr,
                 where the dual cell of node i is [r_{i-1/2}, r_{i+1/2}]
                 bounded by arithmetic face midpoints (and 0, r_max at the
                 ends); sum over i recovers the manifold volume
    face_weights A_{i+1/2} = area(S^{n-1}) * w(r_{i+1/2}) at the N interior
                 faces, used for flux coefficients and Dirichlet energies
    """

    geometry: Geometry
    nodes: np.ndarray
    cell_weights: np.ndarray
    face_weights: np.ndarray

    def __post_init__(self):
        for arr in (self.nodes, self.cell_weights, self.face_weights):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def volume(self) -> float:
        return float(self.cell_weights.sum())


@dataclass(frozen=True)
class Field:
    """A radial scalar profile sampled at the nodes of a grid."""

    grid: RadialGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise GridMismatchError(
                f"field of length {values.shape} on grid of {self.grid.nodes.shape}")
        object.__setattr__(self, "values", values)

    @staticmethod
    def constant(grid: RadialGrid, c: float) -> "Field":
        return Field(grid, np.full(grid.n_nodes, float(c)))

    @staticmethod
    def zeros(grid: RadialGrid) -> "Field":
        return Field(grid, np.zeros(grid.n_nodes))

    def same_grid(self, other: "Field") -> None:
        if not grids_compatible(self.grid, other.grid):
            raise GridMismatchError("fields live on different grids")


def grids_compatible(a: RadialGrid, b: RadialGrid) -> bool:
    return a is b or (a.geometry == b.geometry and np.array_equal(a.nodes, b.nodes))


def _cell_integrals(geometry: Geometry, bounds: np.ndarray) -> np.ndarray:
    """Integrals of area(S^{n-1}) w(r) over consecutive [bounds] intervals."""
    a, b = bounds[:-1], bounds[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    pts = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = geometry.metric_weight(pts)
    return sphere_area(geometry.n - 1) * (half[:, None] * _GL_W[None, :] * vals).sum(axis=1)


def build_grid(geometry: Geometry, N: int, grading: float = 1.0) -> RadialGrid:
    """Graded power-law grid r_i = r_max (i/N)^grading with exact cell weights.

    grading = 1 is uniform; grading > 1 clusters nodes near r = 0, which is
    needed to resolve concentration profiles with small scale parameters.
    """
    if N < 8:
        raise DomainError(f"need at least 8 cells, got N={N}")
    if grading < 1.0:
        raise DomainError(f"grading must be >= 1, got {grading}")
    i = np.arange(N + 1, dtype=float)
    nodes = geometry.r_max * (i / N) ** grading
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    bounds = np.concatenate(([0.0], faces, [geometry.r_max]))
    cell_weights = _cell_integrals(geometry, bounds)
    face_weights = sphere_area(geometry.n - 1) * geometry.metric_weight(faces)
    return RadialGrid(geometry, nodes, cell_weights, face_weights)


def integrate(grid: RadialGrid, f: Field) -> float:
    """Integral of a radial field over the manifold, sum_i W_i f_i."""
    if not grids_compatible(grid, f.grid):
        raise GridMismatchError("field does not live on the given grid")
    return float((grid.cell_weights * f.values).sum())
