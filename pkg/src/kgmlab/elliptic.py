"""Divergence-form discretization of the Laplace-Beltrami operator.

The operator L = Delta_g + potential is realized as a finite-volume
tridiagonal matrix

    (L u)_i = -(1/W_i) [ A_{i+1/2} (u_{i+1}-u_i)/(r_{i+1}-r_i)
                         - A_{i-1/2} (u_i-u_{i-1})/(r_i-r_{i-1}) ]
              + potential_i u_i

with the geometer's sign convention Delta_g = -div grad (eigenvalues are
nonnegative).  The face at r = 0 carries zero area, which encodes the
regularity condition u'(0) = 0; on the sphere the antipodal face at
r = pi also carries zero area.  On the ball the outer boundary imposes
homogeneous Dirichlet data: the last row is the identity and the coupling
between the last two nodes is removed (eliminating u_N = 0).

Because a single conductance A_f / h_f is shared by each face, the matrix
is exactly self-adjoint in the weighted inner product <a,b>_W = sum W_i
a_i b_i, and <L u, u>_W equals the discrete Dirichlet energy plus the
potential term to rounding accuracy.  That exactness is what later makes
the discrete differential of the auxiliary energy an identity rather than
an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import GridMismatchError, OperatorNotInvertibleError
from .model import Field, GeometryKind, RadialGrid, grids_compatible


@dataclass(frozen=True)
class DiscreteOperator:
    grid: RadialGrid
    sub: np.ndarray    # sub[i]  = coupling of row i to node i-1 (sub[0] = 0)
    diag: np.ndarray
    sup: np.ndarray    # sup[i]  = coupling of row i to node i+1 (sup[N] = 0)
    potential: np.ndarray

    def __post_init__(self):
        for arr in (self.sub, self.diag, self.sup, self.potential):
            arr.setflags(write=False)

    @property
    def is_dirichlet(self) -> bool:
        return self.grid.geometry.kind is GeometryKind.BALL


def _check_field(grid: RadialGrid, f: Field) -> np.ndarray:
    if not grids_compatible(grid, f.grid):
        raise GridMismatchError("field does not live on the operator grid")
    return f.values


def assemble(grid: RadialGrid, potential: Field) -> DiscreteOperator:
    """Assemble Delta_g + potential on the grid."""
    pot = _check_field(grid, potential)
    N = grid.n_nodes - 1
    h = np.diff(grid.nodes)
    flux = grid.face_weights / h     # conductance of each interior face
    W = grid.cell_weights
    sub = np.zeros(N + 1)
    diag = np.zeros(N + 1)
    sup = np.zeros(N + 1)
    diag[:-1] += flux / W[:-1]
    sup[:-1] = -flux / W[:-1]
    diag[1:] += flux / W[1:]
    sub[1:] = -flux / W[1:]
    if grid.geometry.kind is GeometryKind.BALL:
        # homogeneous Dirichlet at r = r_max: identity row, coupling removed
        diag[N] = 1.0
        sub[N] = 0.0
        sup[N - 1] = 0.0
        diag = diag + pot
        diag[N] = 1.0   # Dirichlet row carries no potential
    else:
        diag = diag + pot
    return DiscreteOperator(grid, sub, diag, sup, pot.copy())


def apply(op: DiscreteOperator, u: Field) -> Field:
    """Matrix-vector product L u, evaluated in flux form.

    Fluxes are differences of node values, so constants are annihilated by
    the second-order part exactly (zero flux), not merely to rounding.
    """
    x = _check_field(op.grid, u)
    grid = op.grid
    h = np.diff(grid.nodes)
    F = grid.face_weights * np.diff(x) / h
    W = grid.cell_weights
    out = np.empty_like(x)
    if op.is_dirichlet:
        # row N is the identity; row N-1 sees the eliminated value u_N = 0
        F[-1] = grid.face_weights[-1] * (0.0 - x[-2]) / h[-1]
        out[0] = -F[0] / W[0]
        out[1:-1] = -(F[1:] - F[:-1]) / W[1:-1]
        out[:-1] += op.potential[:-1] * x[:-1]
        out[-1] = x[-1]
    else:
        out[0] = -F[0] / W[0]
        out[1:-1] = -(F[1:] - F[:-1]) / W[1:-1]
        out[-1] = F[-1] / W[-1]
        out += op.potential * x
    return Field(op.grid, out)


def solve(op: DiscreteOperator, rhs: Field) -> Field:
    """Direct solve L x = rhs via banded Cholesky in the W-symmetrized form.

    Multiplying row i by W_i turns L into a symmetric tridiagonal matrix,
    positive definite whenever the potential is >= 0 and not identically 0
    (or the geometry is Dirichlet).  Cholesky failure is reported as a
    structured invertibility error.
    """
    b = _check_field(op.grid, rhs)
    W = op.grid.cell_weights
    # symmetrized system T x = W*b with T_ij = W_i L_ij
    ab = np.zeros((2, op.grid.n_nodes))
    ab[0, 1:] = W[:-1] * op.sup[:-1]
    ab[1, :] = W * op.diag
    scaled = W * b
    try:
        x = solveh_banded(ab, scaled, lower=False)
    except np.linalg.LinAlgError as exc:
        raise OperatorNotInvertibleError("operator not invertible") from exc
    if not np.all(np.isfinite(x)):
        raise OperatorNotInvertibleError("operator not invertible")
    return Field(op.grid, x)


def dirichlet_energy(grid: RadialGrid, u: Field) -> float:
    """sum over faces of A_{i+1/2} (u_{i+1}-u_i)^2 / (r_{i+1}-r_i).

    Consistent with assemble: <L u, u>_W = dirichlet_energy(u) when the
    potential vanishes (on the sphere unconditionally; on the ball for
    fields satisfying the boundary condition u_N = 0).
    """
    x = _check_field(grid, u)
    return float((grid.face_weights * np.diff(x) ** 2 / np.diff(grid.nodes)).sum())


def h1_norm_sq(grid: RadialGrid, u: Field) -> float:
    """Discrete squared H^1 norm: dirichlet_energy + weighted L^2."""
    x = _check_field(grid, u)
    return dirichlet_energy(grid, u) + float((grid.cell_weights * x * x).sum())


def node_gradient(grid: RadialGrid, u: Field) -> np.ndarray:
    """Radial derivative u'(r_i): 3-point stencils exact for quadratics on
    arbitrary node spacing, one-sided at both ends."""
    x = _check_field(grid, u)
    r = grid.nodes
    du = np.empty_like(x)
    hm = r[1:-1] - r[:-2]
    hp = r[2:] - r[1:-1]
    du[1:-1] = (-hp / (hm * (hm + hp)) * x[:-2]
                + (hp - hm) / (hm * hp) * x[1:-1]
                + hm / (hp * (hm + hp)) * x[2:])
    h0, h1 = r[1] - r[0], r[2] - r[1]
    du[0] = (-(2 * h0 + h1) / (h0 * (h0 + h1)) * x[0]
             + (h0 + h1) / (h0 * h1) * x[1]
             - h0 / (h1 * (h0 + h1)) * x[2])
    hN, hN1 = r[-1] - r[-2], r[-2] - r[-3]
    du[-1] = ((2 * hN + hN1) / (hN * (hN + hN1)) * x[-1]
              - (hN + hN1) / (hN * hN1) * x[-2]
              + hN / (hN1 * (hN + hN1)) * x[-3])
    return du
