import math

import numpy as np
import pytest

from conftest import smooth_random_field
from kgmlab import elliptic
from kgmlab.errors import OperatorNotInvertibleError
from kgmlab.model import Field, Geometry, GeometryKind, build_grid


def laplacian(grid):
    return elliptic.assemble(grid, Field.zeros(grid))


class TestAssembleApply:
    def test_constants_in_kernel(self, sphere5):
        op = laplacian(sphere5)
        out = elliptic.apply(op, Field.constant(sphere5, 1.0))
        assert np.abs(out.values).max() == 0.0

    def test_identity_potential(self, sphere5):
        op = elliptic.assemble(sphere5, Field.constant(sphere5, 1.0))
        out = elliptic.apply(op, Field.constant(sphere5, 1.0))
        assert np.abs(out.values - 1.0).max() == 0.0

    def test_zero_field(self, sphere5):
        op = laplacian(sphere5)
        assert np.abs(elliptic.apply(op, Field.zeros(sphere5)).values).max() == 0.0

    def test_first_eigenpair(self, sphere5):
        # cos(r) restricted from the ambient coordinate: eigenvalue n
        op = laplacian(sphere5)
        u = Field(sphere5, np.cos(sphere5.nodes))
        res = elliptic.apply(op, u).values - 5 * u.values
        assert np.abs(res).max() < 2e-3

    def test_eigenpair_second_order(self):
        geo = Geometry(GeometryKind.SPHERE, 5)
        errs = []
        for N in (64, 128, 256):
            g = build_grid(geo, N)
            u = Field(g, np.cos(g.nodes))
            res = elliptic.apply(laplacian(g), u).values - 5 * u.values
            errs.append(np.abs(res).max())
        assert errs[0] / errs[1] > 3.0
        assert errs[1] / errs[2] > 3.0

    def test_self_adjointness(self, sphere5):
        op = laplacian(sphere5)
        rng = np.random.default_rng(0)
        W = sphere5.cell_weights
        for _ in range(10):
            a = rng.standard_normal(sphere5.n_nodes)
            b = rng.standard_normal(sphere5.n_nodes)
            La = elliptic.apply(op, Field(sphere5, a)).values
            Lb = elliptic.apply(op, Field(sphere5, b)).values
            gap = abs((W * La * b).sum() - (W * a * Lb).sum())
            na = np.sqrt((W * a * a).sum())
            nb = np.sqrt((W * b * b).sum())
            assert gap <= 1e-12 * na * nb

    def test_ball_self_adjointness(self, ball5):
        op = elliptic.assemble(ball5, Field.constant(ball5, 1.0))
        rng = np.random.default_rng(1)
        W = ball5.cell_weights
        a = rng.standard_normal(ball5.n_nodes)
        b = rng.standard_normal(ball5.n_nodes)
        La = elliptic.apply(op, Field(ball5, a)).values
        Lb = elliptic.apply(op, Field(ball5, b)).values
        assert abs((W * La * b).sum() - (W * a * Lb).sum()) < 1e-10


class TestSolve:
    def test_constant(self, sphere5):
        op = elliptic.assemble(sphere5, Field.constant(sphere5, 1.0))
        x = elliptic.solve(op, Field.constant(sphere5, 1.0))
        assert np.abs(x.values - 1.0).max() < 1e-13

    def test_screened_constant(self, sphere3):
        m1sq, q, c = 2.0, 0.7, 1.3
        op = elliptic.assemble(sphere3, Field.constant(sphere3, m1sq))
        x = elliptic.solve(op, Field.constant(sphere3, q * c * c))
        assert np.abs(x.values - q * c * c / m1sq).max() < 1e-13

    def test_eigen_solve(self):
        g = build_grid(Geometry(GeometryKind.SPHERE, 5), 256)
        op = elliptic.assemble(g, Field.constant(g, 1.0))
        rhs = Field(g, 6.0 * np.cos(g.nodes))
        x = elliptic.solve(op, rhs)
        assert np.abs(x.values - np.cos(g.nodes)).max() < 2e-4

    def test_singular_operator(self, sphere5):
        # zero potential on the closed sphere: constants in the kernel
        op = laplacian(sphere5)
        with pytest.raises(OperatorNotInvertibleError, match="not invertible"):
            elliptic.solve(op, Field.constant(sphere5, 1.0))

    def test_maximum_principle(self, sphere5):
        rng = np.random.default_rng(2)
        op = elliptic.assemble(
            sphere5, Field(sphere5, 0.5 + rng.random(sphere5.n_nodes)))
        rhs = Field(sphere5, rng.random(sphere5.n_nodes))
        x = elliptic.solve(op, rhs)
        assert x.values.min() >= -1e-12

    def test_dirichlet_ball(self, ball5):
        op = elliptic.assemble(ball5, Field.constant(ball5, 1.0))
        rhs_values = np.ones(ball5.n_nodes)
        rhs_values[-1] = 0.0
        x = elliptic.solve(op, Field(ball5, rhs_values))
        assert x.values[-1] == 0.0
        assert x.values.min() >= -1e-12


class TestDirichletEnergy:
    def test_constant(self, sphere5):
        assert elliptic.dirichlet_energy(sphere5, Field.constant(sphere5, 3.0)) == 0.0

    def test_rayleigh_identity(self):
        # <L u, u>_W = dirichlet energy for the eigenfunction, both near
        # n * int cos^2 dv
        g = build_grid(Geometry(GeometryKind.SPHERE, 5), 512)
        u = Field(g, np.cos(g.nodes))
        d = elliptic.dirichlet_energy(g, u)
        quad = (g.cell_weights * np.cos(g.nodes) ** 2).sum()
        assert d == pytest.approx(5 * quad, rel=2e-4)

    def test_quadratic_form_consistency(self, sphere5):
        rng = np.random.default_rng(3)
        pot = Field(sphere5, 0.2 + rng.random(sphere5.n_nodes))
        op = elliptic.assemble(sphere5, pot)
        for _ in range(5):
            u = smooth_random_field(sphere5, rng)
            W = sphere5.cell_weights
            lhs = (W * elliptic.apply(op, u).values * u.values).sum()
            rhs = elliptic.dirichlet_energy(sphere5, u) \
                + (W * pot.values * u.values ** 2).sum()
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_bubble_energy_matches_fine_quadrature(self):
        # gradient of the concentration profile, fine-grid quadrature oracle
        from scipy.integrate import quad
        from kgmlab.asymptotics import BubbleSpec, bubble
        n, mu = 5, 0.1
        lam = n * (n - 2)
        area = 2 * math.pi ** 3  # vol(S^4) * ... computed below instead
        from kgmlab.model import sphere_area
        area = sphere_area(n - 1)

        def grad_sq(r):
            # d/dr (mu / (mu^2 + r^2/lam))^{3/2}
            core = mu / (mu ** 2 + r ** 2 / lam)
            dcore = -mu * (2 * r / lam) / (mu ** 2 + r ** 2 / lam) ** 2
            return (1.5 * core ** 0.5 * dcore) ** 2

        oracle, _ = quad(lambda r: grad_sq(r) * math.sin(r) ** 4, 0, math.pi,
                         limit=400)
        oracle *= area
        g = build_grid(Geometry(GeometryKind.SPHERE, 5), 4000, grading=2.0)
        d = elliptic.dirichlet_energy(g, bubble(g, BubbleSpec(mu, 5)))
        assert d > 0
        assert d == pytest.approx(oracle, rel=1e-3)


class TestNodeGradient:
    def test_exact_for_quadratics(self):
        g = build_grid(Geometry(GeometryKind.SPHERE, 3), 64, grading=1.7)
        u = Field(g, 2.0 + 3.0 * g.nodes - 0.5 * g.nodes ** 2)
        du = elliptic.node_gradient(g, u)
        assert np.abs(du - (3.0 - g.nodes)).max() < 1e-10
