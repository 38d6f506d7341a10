"""Numerical mountain-pass search and Newton refinement for the coupled
system

    Delta_g u + m0^2 u = (u+)^(p-1) + omega^2 (1 - q v)^2 u
    Delta_g v + (m1^2 + q^2 u^2) v = q u^2.

The search deforms a discretized path from 0 to a negative-energy endpoint:
locate the maximal-energy node, move it one normalized W-gradient descent
step, and re-spline the path through the moved node.  The path is kept
inside the ray family {t d : t >= 0} through the current maximal node,
with the endpoint re-scaled along the ray so its energy stays negative.
A free polygonal path tears at critical exponents (segments jump the
energy ridge between nodes, and the nodal maximum collapses); constraining
the re-splined path to rays makes tearing impossible and the level
estimate monotone.  A descent step is accepted only if it lowers the ray
maximum.

The acceptance gate is not the path level: the candidate is polished by a
damped Newton iteration on the coupled residuals, and a report is accepted
only when both residual max-norms fall below 1e-8 and the solution is
positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from . import elliptic, energy as energy_mod, gauge
from .errors import (DomainError, HypothesisRefusedError, NewtonDivergedError,
                     NoConvergenceError, NoNegativeEndpointError)
from .model import Field, Params, RadialGrid

RESIDUAL_GATE = 1e-8
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MPConfig:
    path_points: int = 40
    max_outer_iters: int = 150
    descent_step: float = 0.5
    grad_tol: float = 1e-6
    endpoint_scale_max: float = 2.0 ** 40

    def __post_init__(self):
        if self.path_points < 3:
            raise DomainError("need at least 3 path points")
        if self.descent_step <= 0 or self.grad_tol <= 0:
            raise DomainError("tolerances and steps must be positive")


@dataclass(frozen=True)
class SolveReport:
    u: Field
    v: Field
    level_c: float
    grad_norm: float
    residual1: float
    residual2: float
    newton_iters: int
    min_u: float


def _wnorm(grid: RadialGrid, x: np.ndarray) -> float:
    return float(np.sqrt((grid.cell_weights * x * x).sum()))


def residuals(grid: RadialGrid, params: Params, u: Field, v: Field
              ) -> tuple[np.ndarray, np.ndarray]:
    """Raw residual fields of both equations at (u, v)."""
    op = elliptic.assemble(grid, Field.zeros(grid))
    uu, vv = u.values, v.values
    up = np.maximum(uu, 0.0)
    F1 = (elliptic.apply(op, u).values + params.m0 ** 2 * uu
          - up ** (params.p - 1.0)
          - params.omega ** 2 * (1.0 - params.q * vv) ** 2 * uu)
    F2 = (elliptic.apply(op, v).values
          + (params.m1 ** 2 + params.q ** 2 * uu ** 2) * vv
          - params.q * uu ** 2)
    return F1, F2


def constant_solution(params: Params, c_max: float = 1e6):
    """Positive constant solution of the system, if one exists.

    Constants reduce the system to the scalar equation
        m0^2 = c^(p-2) + omega^2 m1^4 / (m1^2 + q^2 c^2)^2
    solved by doubling plus bisection.  Returns (c, v) or None when no
    sign change is found in (0, c_max].
    """
    m0sq = params.m0 ** 2

    def f(c):
        screen = params.m1 ** 2 / (params.m1 ** 2 + params.q ** 2 * c * c)
        return c ** (params.p - 2.0) + params.omega ** 2 * screen ** 2 - m0sq

    lo = 1e-12
    if f(lo) > 0.0:
        return None
    hi = 1.0
    while f(hi) <= 0.0:
        hi *= 2.0
        if hi > c_max:
            return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    c = 0.5 * (lo + hi)
    v = params.q * c * c / (params.m1 ** 2 + params.q ** 2 * c * c)
    return c, v


def find_endpoint(grid: RadialGrid, params: Params, seed: Field,
                  cfg: MPConfig = MPConfig()) -> tuple[Field, float]:
    """Scale the seed by doubling until the energy turns negative."""
    if float(np.maximum(seed.values, 0.0).max()) <= 0.0:
        raise DomainError("seed must have a nontrivial positive part")
    T = 1.0
    while energy_mod.energy(grid, params, Field(grid, T * seed.values)).total >= 0.0:
        T *= 2.0
        if T > cfg.endpoint_scale_max:
            raise NoNegativeEndpointError("no negative endpoint")
    return Field(grid, T * seed.values), T


def _newton_core(grid: RadialGrid, params: Params, u0: np.ndarray, v0: np.ndarray,
                 tol: float, max_iters: int):
    """Damped Newton with Levenberg-type diagonal regularization.

    The lift handles the soft dilation mode of critical blow-up profiles
    (the linearization is nearly singular along the family direction, so a
    raw Newton step is huge while the residual barely moves).  The shift
    decays to zero on accepted steps, restoring quadratic convergence."""
    op = elliptic.assemble(grid, Field.zeros(grid))
    sub, dia, sup = op.sub, op.diag, op.sup
    p, m0, m1, q, om = params.p, params.m0, params.m1, params.q, params.omega
    u, v = u0.copy(), v0.copy()
    M = len(u)

    def res_pair(uu, vv):
        f1, f2 = residuals(grid, params, Field(grid, uu), Field(grid, vv))
        return f1, f2, max(float(np.abs(f1).max()), float(np.abs(f2).max()))

    F1, F2, res = res_pair(u, v)
    floor = 16.0 * np.finfo(float).eps * float(np.abs(dia).max()) \
        * max(1.0, float(np.abs(u).max()), float(np.abs(v).max()))
    lam = 0.0
    for it in range(max_iters):
        if res <= tol:
            return u, v, it, res
        up = np.maximum(u, 0.0)
        d11 = (dia + m0 ** 2
               - (p - 1.0) * np.where(u > 0.0, up ** (p - 2.0), 0.0)
               - om ** 2 * (1.0 - q * v) ** 2)
        d12 = 2.0 * q * om ** 2 * (1.0 - q * v) * u
        d21 = -2.0 * q * u * (1.0 - q * v)
        d22 = dia + m1 ** 2 + q ** 2 * u ** 2
        rhs = np.empty(2 * M)
        rhs[0::2] = -F1
        rhs[1::2] = -F2
        accepted = False
        for _ in range(20):
            # interleave unknowns (u_0, v_0, u_1, v_1, ...): bandwidth (2, 2)
            ab = np.zeros((5, 2 * M))
            ab[2, 0::2] = d11 + lam
            ab[2, 1::2] = d22 + lam
            ab[1, 1::2] = d12
            ab[3, 0::2] = d21
            ab[0, 2::2] = sup[:-1]
            ab[0, 3::2] = sup[:-1]
            ab[4, 0:-2:2] = sub[1:]
            ab[4, 1:-2:2] = sub[1:]
            delta = solve_banded((2, 2), ab, rhs)
            un = u + delta[0::2]
            vn = v + delta[1::2]
            G1, G2, rn = res_pair(un, vn)
            if rn < res:
                u, v, F1, F2, res = un, vn, G1, G2, rn
                lam = 0.0 if lam < 1e-10 else 0.25 * lam
                accepted = True
                break
            lam = max(1e-3, 10.0 * lam)
        if not accepted:
            # stalled on the rounding floor of the residual evaluation
            if res <= max(tol, floor):
                return u, v, it, res
            # Degenerate valley (e.g. the conformal family at the critical
            # mass): no damped step helps, but full Newton steps slide along
            # the near-kernel direction to an isolated discrete root.
            return _newton_escape(grid, params, u, v, tol, max_iters - it,
                                  res_pair, it)
    if res <= max(tol, floor):
        return u, v, max_iters, res
    raise NewtonDivergedError("newton diverged")


def _newton_escape(grid, params, u, v, tol, budget, res_pair, it0):
    op = elliptic.assemble(grid, Field.zeros(grid))
    sub, dia, sup = op.sub, op.diag, op.sup
    p, m0, m1, q, om = params.p, params.m0, params.m1, params.q, params.omega
    M = len(u)
    for it in range(max(budget, 1)):
        F1, F2, res = res_pair(u, v)
        if res <= tol:
            return u, v, it0 + it, res
        up = np.maximum(u, 0.0)
        d11 = (dia + m0 ** 2
               - (p - 1.0) * np.where(u > 0.0, up ** (p - 2.0), 0.0)
               - om ** 2 * (1.0 - q * v) ** 2)
        d12 = 2.0 * q * om ** 2 * (1.0 - q * v) * u
        d21 = -2.0 * q * u * (1.0 - q * v)
        d22 = dia + m1 ** 2 + q ** 2 * u ** 2
        ab = np.zeros((5, 2 * M))
        ab[2, 0::2] = d11
        ab[2, 1::2] = d22
        ab[1, 1::2] = d12
        ab[3, 0::2] = d21
        ab[0, 2::2] = sup[:-1]
        ab[0, 3::2] = sup[:-1]
        ab[4, 0:-2:2] = sub[1:]
        ab[4, 1:-2:2] = sub[1:]
        rhs = np.empty(2 * M)
        rhs[0::2] = -F1
        rhs[1::2] = -F2
        delta = solve_banded((2, 2), ab, rhs)
        u = u + delta[0::2]
        v = v + delta[1::2]
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise NewtonDivergedError("newton diverged")
    raise NewtonDivergedError("newton diverged")


def newton_refine(grid: RadialGrid, params: Params, u0: Field, v0: Field,
                  tol: float = 1e-10, max_iters: int = 80) -> SolveReport:
    """Damped Newton on the coupled 2(N+1)-unknown system."""
    if not (np.all(np.isfinite(u0.values)) and np.all(np.isfinite(v0.values))):
        raise DomainError("initial guess must be finite")
    u, v, iters, _ = _newton_core(grid, params, u0.values, v0.values, tol, max_iters)
    uf, vf = Field(grid, u), Field(grid, v)
    F1, F2 = residuals(grid, params, uf, vf)
    g = energy_mod.grad_energy(grid, params, uf)
    return SolveReport(
        u=uf, v=vf,
        level_c=energy_mod.energy(grid, params, uf).total,
        grad_norm=_wnorm(grid, g.values),
        residual1=float(np.abs(F1).max()),
        residual2=float(np.abs(F2).max()),
        newton_iters=iters,
        min_u=float(u.min()),
    )


def _ray_max(grid, params, d: np.ndarray, cfg: MPConfig):
    """Maximum of the energy along {t d}, t in [0, T] with negative endpoint.

    Samples path_points + 1 nodes, then golden-section refinement around
    the maximal node.  Returns (max field, level)."""
    E_of = lambda x: energy_mod.energy(grid, params, Field(grid, x)).total
    T = 1.0
    while E_of(T * d) >= 0.0:
        T *= 2.0
        if T > cfg.endpoint_scale_max:
            raise NoNegativeEndpointError("no negative endpoint")
    ts = np.linspace(0.0, 1.0, cfg.path_points + 1) * T
    Es = np.array([E_of(t * d) for t in ts])
    k = int(np.argmax(Es))
    lo = ts[max(k - 1, 0)]
    hi = ts[min(k + 1, cfg.path_points)]
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = E_of(x1 * d), E_of(x2 * d)
    for _ in range(18):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = E_of(x2 * d)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = E_of(x1 * d)
    t = 0.5 * (lo + hi)
    return t * d, E_of(t * d)


def mountain_pass(grid: RadialGrid, params: Params, seed: Field,
                  cfg: MPConfig = MPConfig()) -> SolveReport:
    """Min-max search followed by Newton refinement.

    Raises HypothesisRefusedError outside |omega| < m0, and
    NoConvergenceError (with the level history attached) when the refined
    candidate fails the residual/positivity gate.
    """
    if abs(params.omega) >= params.m0:
        raise HypothesisRefusedError(
            f"|omega|={abs(params.omega)} >= m0={params.m0}: outside the "
            "phase range of the existence theorems")
    if float(np.maximum(seed.values, 0.0).max()) <= 0.0:
        raise DomainError("seed must have a nontrivial positive part")

    d = seed.values / _wnorm(grid, seed.values)
    m, level = _ray_max(grid, params, d, cfg)
    levels = [level]
    gn = np.inf
    for _ in range(cfg.max_outer_iters):
        g = energy_mod.grad_energy(grid, params, Field(grid, m)).values
        gn = _wnorm(grid, g)
        if gn <= cfg.grad_tol:
            break
        s = cfg.descent_step
        accepted = False
        for _ in range(15):
            trial = m - s * g / gn
            if float(np.maximum(trial, 0.0).max()) > 0.0:
                try:
                    m2, lvl2 = _ray_max(grid, params, trial, cfg)
                except NoNegativeEndpointError:
                    m2, lvl2 = None, np.inf
                if lvl2 < level:
                    m, level = m2, lvl2
                    levels.append(level)
                    accepted = True
                    break
            s *= 0.5
        if not accepted:
            break   # descent plateaued; hand over to Newton

    v0 = gauge.solve_gauge(grid, params, Field(grid, m)).v
    try:
        report = newton_refine(grid, params, Field(grid, m), v0)
    except NewtonDivergedError as exc:
        raise NoConvergenceError("no convergence", levels) from exc
    ok = (report.residual1 <= RESIDUAL_GATE and report.residual2 <= RESIDUAL_GATE
          and report.min_u > 0.0)
    if not ok:
        raise NoConvergenceError("no convergence", levels)
    return SolveReport(
        u=report.u, v=report.v,
        level_c=level,              # path estimate; refinement only polishes
        grad_norm=gn,
        residual1=report.residual1,
        residual2=report.residual2,
        newton_iters=report.newton_iters,
        min_u=report.min_u,
    )
