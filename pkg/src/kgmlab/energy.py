"""Mountain-pass functional, its exact discrete gradient, and the sharp
Sobolev constants with the Aubin test-function machinery.

The functional splits as

    I(u) = 1/2 int |grad u|^2 + (m0^2/2) int u^2 - (1/p) int (u+)^p
           - (omega^2/2) int (1 - q v) u^2,      v = gauge potential of u.

The last term is the auxiliary energy scaled by omega^2.  Because the
discrete operator is exactly self-adjoint in the W-inner product, the
W-gradient of the auxiliary energy is exactly (1 - q v)^2 u: the square
jumps from u onto (1 - q v) at the discrete level with no remainder, and
grad_energy below is the exact gradient of energy(...).total.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elliptic, gauge
from .errors import DomainError
from .model import Field, Params, RadialGrid, integrate, sphere_area


@dataclass(frozen=True)
class EnergyBreakdown:
    dirichlet: float       # 1/2 int |grad u|^2
    mass: float            # (m0^2/2) int u^2
    nonlinear: float       # (1/p) int (u+)^p
    gauge_coupling: float  # (omega^2/2) int (1 - q v) u^2
    total: float


def aux_psi(grid: RadialGrid, params: Params, u: Field) -> float:
    """Auxiliary energy 1/2 int (1 - q v) u^2 with v the gauge potential."""
    v = gauge.solve_gauge(grid, params, u).v
    return 0.5 * float((grid.cell_weights * (1.0 - params.q * v.values)
                        * u.values ** 2).sum())


def grad_psi(grid: RadialGrid, params: Params, u: Field) -> Field:
    """Exact W-gradient of aux_psi: node-wise (1 - q v)^2 u."""
    v = gauge.solve_gauge(grid, params, u).v
    return Field(grid, (1.0 - params.q * v.values) ** 2 * u.values)


def energy(grid: RadialGrid, params: Params, u: Field) -> EnergyBreakdown:
    W = grid.cell_weights
    dirichlet = 0.5 * elliptic.dirichlet_energy(grid, u)
    mass = 0.5 * params.m0 ** 2 * float((W * u.values ** 2).sum())
    up = np.maximum(u.values, 0.0)
    nonlinear = float((W * up ** params.p).sum()) / params.p
    coupling = params.omega ** 2 * aux_psi(grid, params, u)
    return EnergyBreakdown(dirichlet, mass, nonlinear, coupling,
                           dirichlet + mass - nonlinear - coupling)


def grad_energy(grid: RadialGrid, params: Params, u: Field) -> Field:
    """W-gradient of the total energy; its zeros are discrete solutions of
    the matter equation with the gauge potential eliminated."""
    op = elliptic.assemble(grid, Field.zeros(grid))
    v = gauge.solve_gauge(grid, params, u).v
    up = np.maximum(u.values, 0.0)
    g = (elliptic.apply(op, u).values
         + params.m0 ** 2 * u.values
         - up ** (params.p - 1.0)
         - params.omega ** 2 * (1.0 - params.q * v.values) ** 2 * u.values)
    return Field(grid, g)


def sobolev_Kn(n: int) -> float:
    """Sharp constant of the Euclidean Sobolev embedding H^1 -> L^{2n/(n-2)},
    normalized by n(n-2) omega_n^{2/n} K_n^2 = 4 with omega_n = vol(S^n)."""
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    return 2.0 / np.sqrt(n * (n - 2) * sphere_area(n) ** (2.0 / n))


def mp_threshold(n: int) -> float:
    """Compactness threshold 1/(n K_n^n) for the critical min-max level."""
    return 1.0 / (n * sobolev_Kn(n) ** n)


def aubin_test_function(grid: RadialGrid, eps: float, rho0: float) -> Field:
    """Truncated concentration profile supported in the ball r <= rho0."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    if not (0.0 < rho0 < grid.geometry.r_max):
        raise DomainError("rho0 must lie strictly inside the domain")
    n = grid.geometry.n
    r = grid.nodes
    core = (eps / (eps ** 2 + r ** 2)) ** ((n - 2) / 2.0)
    shift = (eps / (eps ** 2 + rho0 ** 2)) ** ((n - 2) / 2.0)
    vals = np.where(r <= rho0, np.maximum(core - shift, 0.0), 0.0)
    return Field(grid, vals)


def aubin_quotient(grid: RadialGrid, lam: float, u: Field) -> float:
    """(int |grad u|^2 + lam u^2) / (int |u|^{2*})^{2/2*}."""
    n = grid.geometry.n
    two_star = 2.0 * n / (n - 2.0)
    denom = integrate(grid, Field(grid, np.abs(u.values) ** two_star))
    if denom <= 0.0:
        raise DomainError("quotient undefined for the zero field")
    num = elliptic.dirichlet_energy(grid, u) \
        + lam * float((grid.cell_weights * u.values ** 2).sum())
    return num / denom ** (2.0 / two_star)
