"""Request/response models for the experiment service.

Each request mirrors one block of the experiment configuration; physical
constraints are enforced at validation time so malformed configs are
rejected before any numerics run.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field as PField, field_validator

from ..model import Geometry, GeometryKind, Params


class PhysicsSpec(BaseModel):
    n: int = PField(ge=3)
    p: float
    m0: float = PField(default=1.0, gt=0)
    m1: float = PField(default=1.0, gt=0)
    q: float = PField(default=1.0, gt=0)
    omega: float = 0.0

    @field_validator("p")
    @classmethod
    def _p_range(cls, v, info):
        n = info.data.get("n")
        if n is not None and not (2.0 < v <= 2.0 * n / (n - 2) + 1e-12):
            raise ValueError(f"p={v} outside (2, 2n/(n-2)] for n={n}")
        return v

    def to_params(self) -> Params:
        return Params(self.n, self.p, self.m0, self.m1, self.q, self.omega)


class GeometrySpec(BaseModel):
    kind: Literal["sphere", "ball"] = "sphere"
    r_max: Optional[float] = None

    def to_geometry(self, n: int) -> Geometry:
        return Geometry(GeometryKind(self.kind), n, self.r_max or 0.0)


class GridSpec(BaseModel):
    n_cells: int = PField(default=200, ge=8)
    grading: float = PField(default=1.0, ge=1.0)


class MPSpec(BaseModel):
    path_points: int = PField(default=40, ge=3)
    max_outer_iters: int = PField(default=150, ge=1)
    descent_step: float = PField(default=0.5, gt=0)
    grad_tol: float = PField(default=1e-6, gt=0)
    endpoint_scale_max: float = PField(default=2.0 ** 40, gt=0)


class SolveRequest(BaseModel):
    physics: PhysicsSpec
    geometry: GeometrySpec = GeometrySpec()
    grid: GridSpec = GridSpec()
    mountainpass: MPSpec = MPSpec()
    seed_mu: float = PField(default=0.2, gt=0)


class FieldSamples(BaseModel):
    r: list[float]
    u: list[float]
    v: list[float]


class SolveResponse(BaseModel):
    status: Literal["ok", "no_convergence", "refused"]
    message: str = ""
    level_c: Optional[float] = None
    grad_norm: Optional[float] = None
    residual1: Optional[float] = None
    residual2: Optional[float] = None
    newton_iters: Optional[int] = None
    min_u: Optional[float] = None
    max_u: Optional[float] = None
    samples: Optional[FieldSamples] = None


class SweepRequest(BaseModel):
    physics: PhysicsSpec          # omega field ignored; the sweep supplies it
    geometry: GeometrySpec = GeometrySpec()
    grid: GridSpec = GridSpec()
    mountainpass: MPSpec = MPSpec()
    seed_mu: float = PField(default=0.2, gt=0)
    omega_min: float
    omega_max: float
    count: int = PField(ge=1)


class SweepRow(BaseModel):
    omega: float
    status: Literal["ok", "no_convergence", "refused"]
    level_c: Optional[float] = None
    max_u: Optional[float] = None
    min_u: Optional[float] = None
    residual1: Optional[float] = None
    residual2: Optional[float] = None
    newton_iters: Optional[int] = None
    message: str = ""


class SweepResponse(BaseModel):
    rows: list[SweepRow]


class PhaseRatioRequest(BaseModel):
    dims: list[int]
    mus: list[float]
    q: float = PField(default=1.0, gt=0)
    m1: float = PField(default=1.0, gt=0)
    grid_n: int = PField(default=20000, ge=8)


class PhaseRatioRow(BaseModel):
    n: int
    mu: float
    ratio: float
    note: str = ""


class PhaseRatioResponse(BaseModel):
    rows: list[PhaseRatioRow]


class AubinScanRequest(BaseModel):
    n: int = PField(default=5, ge=3)
    lam: float = 1.0
    rho0: float = PField(default=1.0, gt=0)
    eps: list[float]
    grid_n: int = PField(default=8000, ge=8)
    grading: float = PField(default=2.0, ge=1.0)
    kind: Literal["sphere", "ball"] = "sphere"
    r_max: Optional[float] = None


class AubinRow(BaseModel):
    eps: float
    quotient: float
    below_threshold: bool


class AubinScanResponse(BaseModel):
    threshold: float        # 1/K_n^2
    rows: list[AubinRow]
    any_below: bool


class PohozaevRequest(BaseModel):
    n: int = PField(default=5, ge=5)
    mus: list[float]
    r0: float = PField(default=1.0, gt=0)
    q: float = PField(default=1.0, gt=0)
    m1: float = PField(default=1.0, gt=0)
    grid_n: int = PField(default=6000, ge=8)
    grading: float = PField(default=2.0, ge=1.0)


class PohozaevRow(BaseModel):
    mu: float
    beta: float
    r0: float
    lhs_mass: float
    lhs_curv: float
    R_tilde: float
    Q1: float
    Q2: float
    Q3: float
    balance_residual: float
    mass_ratio: float       # lhs_mass / (-C_n mu^2)


class PohozaevResponse(BaseModel):
    C_n: float
    rows: list[PohozaevRow]


class GaugeCheckRequest(BaseModel):
    n: int = PField(default=5, ge=3)
    q: float = PField(default=1.0, gt=0)
    m1: float = PField(default=1.0, gt=0)
    mu: float = PField(default=0.05, gt=0)
    lambdas: list[float]
    n_random: int = PField(default=25, ge=1)
    grid_n: int = PField(default=2000, ge=8)
    grading: float = PField(default=2.0, ge=1.0)
    seed: int = 0


class TruncationRow(BaseModel):
    cutoff: float
    h1_delta: float


class GaugeCheckResponse(BaseModel):
    max_bound_violation: float
    truncation: list[TruncationRow]
    continuity_worst_ratio: float   # max over pairs of lhs/rhs
    continuity_pairs: int


class HealthResponse(BaseModel):
    status: str
    version: str
