"""The gauge map: v solves Delta_g v + (m1^2 + q^2 u^2) v = q u^2.

On a finite grid the equation is a plain linear system with strictly
positive zeroth-order coefficient, so the map is a single direct solve.
The discrete maximum principle (the matrix is an M-matrix) reproduces the
pointwise bounds 0 <= v <= 1/q exactly, up to solver rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import elliptic
from .errors import DomainError
from .model import Field, GeometryKind, Params, RadialGrid


@dataclass(frozen=True)
class GaugeResult:
    v: Field
    min_v: float
    max_v: float
    bound_violation: float  # max(0, -min_v, max_v - 1/q)


def _gauge_rhs(grid: RadialGrid, params: Params, usq: np.ndarray) -> Field:
    rhs = params.q * usq
    if grid.geometry.kind is GeometryKind.BALL:
        rhs = rhs.copy()
        rhs[-1] = 0.0   # Dirichlet row carries the boundary value
    return Field(grid, rhs)


def _solve_screened(grid: RadialGrid, params: Params, usq: np.ndarray) -> Field:
    pot = Field(grid, params.m1 ** 2 + params.q ** 2 * usq)
    op = elliptic.assemble(grid, pot)
    return elliptic.solve(op, _gauge_rhs(grid, params, usq))


def solve_gauge(grid: RadialGrid, params: Params, u: Field) -> GaugeResult:
    """Gauge potential of a matter profile, with its pointwise bounds."""
    if not np.all(np.isfinite(u.values)):
        raise DomainError("gauge solve requires a finite input field")
    v = _solve_screened(grid, params, u.values ** 2)
    min_v = float(v.values.min())
    max_v = float(v.values.max())
    violation = max(0.0, -min_v, max_v - 1.0 / params.q)
    return GaugeResult(v, min_v, max_v, violation)


def truncation_sequence(grid: RadialGrid, params: Params, u: Field,
                        lambdas: Sequence[float]) -> list[tuple[Field, float]]:
    """Solutions of the truncated equations with u_L = min(|u|, L).

    For each cutoff L the screened solve is repeated with u replaced by
    u_L, and the squared discrete H^1 distance to the untruncated solution
    is reported.  Once L exceeds max|u| the truncation is inactive and the
    distance vanishes identically.
    """
    lam = list(lambdas)
    if any(l <= 0 for l in lam) or any(b <= a for a, b in zip(lam, lam[1:])):
        raise DomainError("cutoffs must be positive and increasing")
    final = solve_gauge(grid, params, u).v
    out = []
    for L in lam:
        u_L = np.minimum(np.abs(u.values), L)
        v_L = _solve_screened(grid, params, u_L ** 2)
        diff = Field(grid, v_L.values - final.values)
        out.append((v_L, elliptic.h1_norm_sq(grid, diff)))
    return out


def continuity_check(grid: RadialGrid, params: Params,
                     u1: Field, u2: Field) -> tuple[float, float]:
    """Both sides of the L^2-type continuity estimate for the gauge map.

    lhs = ||v1 - v2||_{H^1}^2 (discrete, squared), rhs = C ||u1 + u2||_{L^2}
    ||u1 - u2||_{L^2} with C = 1/min(1, m1^2).  The constant follows from
    testing the difference equation with the difference itself and using
    the pointwise bounds 0 <= v <= 1/q.  Callers assert lhs <= rhs (up to
    a relative 1e-8 slack).
    """
    u1.same_grid(u2)
    v1 = solve_gauge(grid, params, u1).v
    v2 = solve_gauge(grid, params, u2).v
    diff = Field(grid, v1.values - v2.values)
    lhs = elliptic.h1_norm_sq(grid, diff)
    W = grid.cell_weights
    C = 1.0 / min(1.0, params.m1 ** 2)
    rhs = C * np.sqrt((W * (u1.values + u2.values) ** 2).sum()) \
            * np.sqrt((W * (u1.values - u2.values) ** 2).sum())
    return float(lhs), float(rhs)
