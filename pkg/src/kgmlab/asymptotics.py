"""Concentration profiles, exact blow-up solutions on the sphere, the
phase-compensation ratio, rescaled gauge profiles, Pohozaev balance
diagnostics, and the capped potential used in the model counterexample.

All diagnostics live on pole-centered sphere grids.  The quasi-radial
vector field entering the Pohozaev identity is, on the round sphere,

    X = r (1 - r^2/6) d/dr,
    div X = (1 - r^2/2) + (n-1) cot(r) r (1 - r^2/6),

which satisfies div X = n + O(r^2) near the pole.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import elliptic, gauge
from .errors import DomainError, UnderResolvedGridWarning
from .model import (Field, Geometry, GeometryKind, Params, RadialGrid,
                    build_grid, sphere_area)


@dataclass(frozen=True)
class BubbleSpec:
    """Concentration profile of weight mu centered at the pole."""
    mu: float
    n: int

    def __post_init__(self):
        if self.mu <= 0:
            raise DomainError("bubble weight must be positive")
        if self.n < 3:
            raise DomainError("dimension must be >= 3")


@dataclass(frozen=True)
class PohozaevReport:
    lhs_mass: float     # int_{B(r0)} { u X(grad u) + ((n-2)/2n)(div X) u^2 }
    lhs_curv: float     # ((n-2)/4n) int_{B(r0)} (Delta div X) u^2
    R_tilde: float      # same mass integrand weighted by (q v - 1)^2
    Q1: float           # boundary flux terms
    Q2: float           # interior deviatoric term
    Q3: float           # boundary zero-order terms
    balance_residual: float
    r0: float           # snapped integration radius actually used


def bubble(grid: RadialGrid, spec: BubbleSpec) -> Field:
    """B_mu(r) = (mu / (mu^2 + r^2/(n(n-2))))^((n-2)/2)."""
    lam = spec.n * (spec.n - 2)
    vals = (spec.mu / (spec.mu ** 2 + grid.nodes ** 2 / lam)) ** ((spec.n - 2) / 2.0)
    return Field(grid, vals)


def sphere_solution(grid: RadialGrid, beta: float) -> Field:
    """Exact positive solution of the critical matter equation on the round
    sphere at the conformal mass n(n-2)/4, blowing up at the pole as
    beta -> 1."""
    if grid.geometry.kind is not GeometryKind.SPHERE:
        raise DomainError("sphere_solution requires a sphere grid")
    if beta <= 1.0:
        raise DomainError(f"beta must exceed 1, got {beta}")
    n = grid.geometry.n
    amp = ((n * (n - 2) / 4.0) * (beta ** 2 - 1.0)) ** ((n - 2) / 4.0)
    vals = amp * (beta - np.cos(grid.nodes)) ** (-(n - 2) / 2.0)
    return Field(grid, vals)


def beta_for_weight(n: int, mu: float) -> float:
    """beta with peak height mu^(-(n-2)/2), i.e. weight mu in the blow-up
    family: (beta+1)/(beta-1) = 4/(n(n-2) mu^2)."""
    a = n * (n - 2) * mu ** 2
    if a >= 4.0:
        raise DomainError("weight too large for the blow-up family")
    return (4.0 + a) / (4.0 - a)


def _ratio_grid(n: int, N: int) -> RadialGrid:
    return build_grid(Geometry(GeometryKind.SPHERE, n), N, grading=2.0)


def phase_ratio(params: Params, mu: float, N: int) -> float:
    """Gauge-compensation ratio int v B^2 / int B^2 for the bubble of
    weight mu, on a pole-graded sphere grid of N cells.

    Always lies in [0, 1/q].  The mu -> 0 limit is 0 in dimensions 3 and 4
    and 1/q in dimensions >= 5.
    """
    if mu <= 0:
        raise DomainError("mu must be positive")
    grid = _ratio_grid(params.n, N)
    inside = int(np.searchsorted(grid.nodes, mu))
    if inside < 8:
        warnings.warn(
            f"only {inside} nodes inside r < mu = {mu:g}; increase N",
            UnderResolvedGridWarning, stacklevel=2)
    B = bubble(grid, BubbleSpec(mu, params.n))
    v = gauge.solve_gauge(grid, params, B).v
    W = grid.cell_weights
    num = float((W * v.values * B.values ** 2).sum())
    den = float((W * B.values ** 2).sum())
    return num / den


def rescaled_gauge_profile(params: Params, mu: float,
                           sample_points, N: int = 20000) -> np.ndarray:
    """Gauge potential of the bubble sampled at blown-up coordinates,
    v(mu x) for the requested x values (linear interpolation)."""
    if mu <= 0:
        raise DomainError("mu must be positive")
    xs = np.asarray(sample_points, dtype=float)
    grid = _ratio_grid(params.n, N)
    if np.any(mu * xs > grid.geometry.r_max):
        raise DomainError("sample point beyond the grid")
    B = bubble(grid, BubbleSpec(mu, params.n))
    v = gauge.solve_gauge(grid, params, B).v
    return np.interp(mu * xs, grid.nodes, v.values)


def _r_cot_r(r: np.ndarray) -> np.ndarray:
    """r cot r, series near 0 to avoid 0/0."""
    out = np.empty_like(r)
    small = np.abs(r) < 1e-4
    rs = r[small]
    out[small] = 1.0 - rs ** 2 / 3.0 - rs ** 4 / 45.0
    rb = r[~small]
    out[~small] = rb * np.cos(rb) / np.maximum(np.sin(rb), 1e-300)
    return out


def _partial_cell_weights(grid: RadialGrid, k0: int) -> np.ndarray:
    """Cell weights restricted to the ball r <= nodes[k0]: full dual cells
    for i < k0 and the left part of node k0's cell, so that sharp-cutoff
    integrals retain second-order accuracy."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(5)
    nodes = grid.nodes
    geometry = grid.geometry
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    bounds = np.concatenate(([0.0], faces, [geometry.r_max]))
    area = sphere_area(geometry.n - 1)
    W = np.zeros(grid.n_nodes)
    for i in range(k0 + 1):
        a = bounds[i]
        b = min(bounds[i + 1], nodes[k0])
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        pts = mid + half * gl_x
        W[i] = area * (half * gl_w * geometry.metric_weight(pts)).sum()
    return W


def pohozaev_terms(grid: RadialGrid, params: Params, u: Field, v: Field,
                   r0: float) -> PohozaevReport:
    """All terms of the Pohozaev balance over the geodesic ball r <= r0.

    For a discrete solution pair of the coupled system the identity

        m0^2 lhs_mass + lhs_curv = omega^2 R_tilde + Q1 - Q2 + Q3

    holds up to the O(h^2) quadrature and differentiation errors collected
    in balance_residual.  r0 is snapped to the nearest node.
    """
    if grid.geometry.kind is not GeometryKind.SPHERE:
        raise DomainError("pohozaev diagnostics require a sphere grid")
    if not (0.0 < r0 < grid.geometry.r_max):
        raise DomainError("r0 must lie strictly inside the domain")
    u.same_grid(v)
    n = grid.geometry.n
    r = grid.nodes
    a = r * (1.0 - r ** 2 / 6.0)
    a_prime = 1.0 - r ** 2 / 2.0
    divX = (1.0 - r ** 2 / 2.0) + (n - 1) * (1.0 - r ** 2 / 6.0) * _r_cot_r(r)

    op = elliptic.assemble(grid, Field.zeros(grid))
    lap_divX = elliptic.apply(op, Field(grid, divX)).values
    du = elliptic.node_gradient(grid, u)

    k0 = int(np.argmin(np.abs(r - r0)))
    k0 = max(2, min(k0, grid.n_nodes - 3))  # keep clear of both poles
    rs = float(r[k0])
    Wb = _partial_cell_weights(grid, k0)

    uu, vv = u.values, v.values
    mass_integrand = uu * a * du + (n - 2) / (2.0 * n) * divX * uu ** 2
    lhs_mass = float((Wb * mass_integrand).sum())
    lhs_curv = (n - 2) / (4.0 * n) * float((Wb * lap_divX * uu ** 2).sum())
    R_tilde = float((Wb * (params.q * vv - 1.0) ** 2 * mass_integrand).sum())

    area = sphere_area(n - 1) * math.sin(rs) ** (n - 1)
    du0, u0 = float(du[k0]), float(uu[k0])
    Q1 = area * ((n - 2) / (2.0 * n) * divX[k0] * du0 * u0
                 + 0.5 * a[k0] * du0 ** 2)
    Q2 = float((Wb * (a_prime - divX / n) * du ** 2).sum())
    two_star = 2.0 * n / (n - 2.0)
    d_divX = elliptic.node_gradient(grid, Field(grid, divX))
    Q3 = area * ((n - 2) / (2.0 * n) * a[k0] * u0 ** two_star
                 - (n - 2) / (4.0 * n) * d_divX[k0] * u0 ** 2)

    balance = abs(params.m0 ** 2 * lhs_mass + lhs_curv
                  - (params.omega ** 2 * R_tilde + Q1 - Q2 + Q3))
    return PohozaevReport(lhs_mass, lhs_curv, R_tilde, Q1, Q2, Q3, balance, rs)


def limit_profile_mass(n: int) -> float:
    """Quadrature oracle for the squared L^2 mass of the Euclidean limit
    profile (1 + |x|^2/(n(n-2)))^(-(n-2)/2); finite for n >= 5."""
    if n < 5:
        raise DomainError("the limit profile is square-integrable only for n >= 5")
    from scipy.integrate import quad
    lam = 1.0 / (n * (n - 2))
    val, _ = quad(lambda rr: (1.0 + lam * rr ** 2) ** (-(n - 2.0)) * rr ** (n - 1),
                  0.0, np.inf, limit=400)
    return sphere_area(n - 1) * val


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def hcheck_potential(grid: RadialGrid, u: Field, K_tilde: float) -> Field:
    """Capped potential of the model counterexample: a quintic-smoothstep
    ramp of height K_tilde applied to

        s = sqrt((n-2)/n) |u|^(n/(n-2)) - |u'|,

    equal to K_tilde wherever s >= 0 (in particular at critical points of
    u) and 0 where s <= -1."""
    if K_tilde <= 0:
        raise DomainError("ramp height must be positive")
    n = grid.geometry.n
    du = elliptic.node_gradient(grid, u)
    s = np.sqrt((n - 2.0) / n) * np.abs(u.values) ** (n / (n - 2.0)) - np.abs(du)
    return Field(grid, K_tilde * _smoothstep(s + 1.0))


def hcheck_ramp_bound(geometry: Geometry, margin: float = 0.1) -> float:
    """Default ramp height: the larger of the mass-vs-profile bound

        [int u0^2 dx / int_{B(sqrt(n(n-2)))} Psi0 dx] * (-(n-2)/(4(n-1)) min S_g)

    and the curvature threshold (n-2)/(4(n-1)) max S_g, both evaluated for
    the model geometry by quadrature, plus a 10% margin (with a unit floor
    when both are nonpositive, e.g. on the flat ball)."""
    from scipy.integrate import quad
    n = geometry.n
    lam = 1.0 / (n * (n - 2))
    s_g = geometry.scalar_curvature
    bound_mass = -np.inf
    if n >= 5:   # the limit profile is square-integrable only there
        cn = limit_profile_mass(n)
        # Psi0 = (n-2)/2 u0^2 (1 - lam r^2)/(1 + lam r^2), positive in the ball
        R0 = math.sqrt(n * (n - 2))
        psi0, _ = quad(
            lambda rr: (n - 2) / 2.0 * (1.0 + lam * rr ** 2) ** (-(n - 1.0))
            * (1.0 - lam * rr ** 2) * rr ** (n - 1), 0.0, R0, limit=200)
        psi0 *= sphere_area(n - 1)
        bound_mass = (cn / psi0) * (-(n - 2) / (4.0 * (n - 1)) * s_g)
    bound_curv = (n - 2) / (4.0 * (n - 1)) * s_g
    base = max(bound_mass, bound_curv)
    if base <= 0.0:
        base = 1.0
    return (1.0 + margin) * base
