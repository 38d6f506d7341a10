"""Experiment runners shared by the HTTP service and the CLI.

Each runner consumes a validated request model and returns a response
model.  Outcomes of individual solves (ok / no_convergence / refused) are
data, not transport errors; runners only raise for malformed requests.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import asymptotics, elliptic, energy, gauge, mountainpass
from .errors import (ConfigError, HypothesisRefusedError, KgmError,
                     NoConvergenceError, UnderResolvedGridWarning)
from .model import Field, Geometry, GeometryKind, Params, build_grid
from .service import schemas


def _solve_setup(physics: schemas.PhysicsSpec, geometry: schemas.GeometrySpec,
                 grid_spec: schemas.GridSpec, mp: schemas.MPSpec, seed_mu: float):
    params = physics.to_params()
    grid = build_grid(geometry.to_geometry(physics.n), grid_spec.n_cells,
                      grid_spec.grading)
    cfg = mountainpass.MPConfig(
        path_points=mp.path_points, max_outer_iters=mp.max_outer_iters,
        descent_step=mp.descent_step, grad_tol=mp.grad_tol,
        endpoint_scale_max=mp.endpoint_scale_max)
    seed = asymptotics.bubble(grid, asymptotics.BubbleSpec(seed_mu, physics.n))
    return params, grid, cfg, seed


def run_solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    params, grid, cfg, seed = _solve_setup(
        req.physics, req.geometry, req.grid, req.mountainpass, req.seed_mu)
    try:
        report = mountainpass.mountain_pass(grid, params, seed, cfg)
    except HypothesisRefusedError as exc:
        return schemas.SolveResponse(status="refused", message=str(exc))
    except (NoConvergenceError, KgmError) as exc:
        return schemas.SolveResponse(status="no_convergence", message=str(exc))
    return schemas.SolveResponse(
        status="ok",
        level_c=report.level_c,
        grad_norm=report.grad_norm,
        residual1=report.residual1,
        residual2=report.residual2,
        newton_iters=report.newton_iters,
        min_u=report.min_u,
        max_u=float(report.u.values.max()),
        samples=schemas.FieldSamples(
            r=grid.nodes.tolist(),
            u=report.u.values.tolist(),
            v=report.v.values.tolist(),
        ),
    )


def run_sweep(req: schemas.SweepRequest) -> schemas.SweepResponse:
    if req.omega_max < req.omega_min:
        raise ConfigError("empty sweep range")
    m0 = req.physics.m0
    if req.omega_min <= -m0 or req.omega_max >= m0:
        raise HypothesisRefusedError(
            f"sweep range [{req.omega_min}, {req.omega_max}] not inside "
            f"(-m0, m0) = ({-m0}, {m0})")
    omegas = np.linspace(req.omega_min, req.omega_max, req.count)
    rows = []
    for om in omegas:
        physics = req.physics.model_copy(update={"omega": float(om)})
        params, grid, cfg, seed = _solve_setup(
            physics, req.geometry, req.grid, req.mountainpass, req.seed_mu)
        try:
            report = mountainpass.mountain_pass(grid, params, seed, cfg)
        except HypothesisRefusedError as exc:
            rows.append(schemas.SweepRow(omega=float(om), status="refused",
                                         message=str(exc)))
            continue
        except (NoConvergenceError, KgmError) as exc:
            rows.append(schemas.SweepRow(omega=float(om), status="no_convergence",
                                         message=str(exc)))
            continue
        rows.append(schemas.SweepRow(
            omega=float(om), status="ok",
            level_c=report.level_c,
            max_u=float(report.u.values.max()),
            min_u=report.min_u,
            residual1=report.residual1,
            residual2=report.residual2,
            newton_iters=report.newton_iters,
        ))
    return schemas.SweepResponse(rows=rows)


def run_phase_ratio(req: schemas.PhaseRatioRequest) -> schemas.PhaseRatioResponse:
    if not req.mus or not req.dims:
        raise ConfigError("phase-ratio needs at least one dimension and one mu")
    mus = []
    duplicated = set()
    for mu in req.mus:
        if mu in mus:
            duplicated.add(mu)
            continue
        mus.append(mu)
    rows = []
    for n in req.dims:
        p = 2.0 * n / (n - 2)
        params = Params(n, p, 1.0, req.m1, req.q, 0.0)
        for mu in mus:
            note = "duplicate mu deduplicated" if mu in duplicated else ""
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", UnderResolvedGridWarning)
                ratio = asymptotics.phase_ratio(params, mu, req.grid_n)
            if any(issubclass(w.category, UnderResolvedGridWarning) for w in caught):
                note = (note + "; " if note else "") + "under-resolved grid"
            rows.append(schemas.PhaseRatioRow(n=n, mu=mu, ratio=ratio, note=note))
    return schemas.PhaseRatioResponse(rows=rows)


def run_aubin_scan(req: schemas.AubinScanRequest) -> schemas.AubinScanResponse:
    if not req.eps:
        raise ConfigError("aubin scan needs a nonempty eps list")
    geometry = Geometry(GeometryKind(req.kind), req.n, req.r_max or 0.0)
    grid = build_grid(geometry, req.grid_n, req.grading)
    threshold = 1.0 / energy.sobolev_Kn(req.n) ** 2
    rows = []
    for eps in req.eps:
        u = energy.aubin_test_function(grid, eps, req.rho0)
        quotient = energy.aubin_quotient(grid, req.lam, u)
        rows.append(schemas.AubinRow(eps=eps, quotient=quotient,
                                     below_threshold=bool(quotient < threshold)))
    return schemas.AubinScanResponse(
        threshold=threshold, rows=rows, any_below=any(r.below_threshold for r in rows))


def run_pohozaev(req: schemas.PohozaevRequest) -> schemas.PohozaevResponse:
    if not req.mus:
        raise ConfigError("pohozaev needs a nonempty mu list")
    n = req.n
    grid = build_grid(Geometry(GeometryKind.SPHERE, n), req.grid_n, req.grading)
    m0 = float(np.sqrt(n * (n - 2) / 4.0))
    params = Params(n, 2.0 * n / (n - 2), m0, req.m1, req.q, 0.0)
    cn = asymptotics.limit_profile_mass(n)
    rows = []
    for mu in req.mus:
        beta = asymptotics.beta_for_weight(n, mu)
        u = asymptotics.sphere_solution(grid, beta)
        v = gauge.solve_gauge(grid, params, u).v
        rep = asymptotics.pohozaev_terms(grid, params, u, v, req.r0)
        rows.append(schemas.PohozaevRow(
            mu=mu, beta=beta, r0=rep.r0,
            lhs_mass=rep.lhs_mass, lhs_curv=rep.lhs_curv, R_tilde=rep.R_tilde,
            Q1=rep.Q1, Q2=rep.Q2, Q3=rep.Q3,
            balance_residual=rep.balance_residual,
            mass_ratio=rep.lhs_mass / (-cn * mu ** 2),
        ))
    return schemas.PohozaevResponse(C_n=cn, rows=rows)


def _smooth_random_field(grid, rng, kmax: int = 6) -> Field:
    vals = np.zeros(grid.n_nodes)
    for k in range(kmax + 1):
        vals += rng.normal(0.0, 1.0 / (1 + k * k)) * np.cos(k * grid.nodes)
    return Field(grid, vals)


def run_gauge_check(req: schemas.GaugeCheckRequest) -> schemas.GaugeCheckResponse:
    if not req.lambdas:
        raise ConfigError("gauge-check needs a nonempty cutoff list")
    n = req.n
    grid = build_grid(Geometry(GeometryKind.SPHERE, n), req.grid_n, req.grading)
    params = Params(n, 2.0 * n / (n - 2), 1.0, req.m1, req.q, 0.0)
    rng = np.random.default_rng(req.seed)

    worst_violation = 0.0
    worst_ratio = 0.0
    for _ in range(req.n_random):
        u1 = _smooth_random_field(grid, rng)
        u2 = _smooth_random_field(grid, rng)
        worst_violation = max(worst_violation,
                              gauge.solve_gauge(grid, params, u1).bound_violation)
        lhs, rhs = gauge.continuity_check(grid, params, u1, u2)
        if rhs > 0:
            worst_ratio = max(worst_ratio, lhs / rhs)

    B = asymptotics.bubble(grid, asymptotics.BubbleSpec(req.mu, n))
    seq = gauge.truncation_sequence(grid, params, B, sorted(req.lambdas))
    truncation = [schemas.TruncationRow(cutoff=L, h1_delta=delta)
                  for L, (_, delta) in zip(sorted(req.lambdas), seq)]
    return schemas.GaugeCheckResponse(
        max_bound_violation=worst_violation,
        truncation=truncation,
        continuity_worst_ratio=worst_ratio,
        continuity_pairs=req.n_random,
    )
