"""
Tests for the analytic and linear reference solutions
"""

import math

import numpy as np
import pytest

from modules.errors import OracleSizeError, ParameterError
from modules.grid import build_grid, div_theta, div_z
from modules.integrator import TRBDF2Integrator
from modules.oracle import (
    MAX_DENSE_SIZE, LinearODESystem, couette, dense_propagator, diffusion_matrix, poiseuille_annulus,
)


class TestCouette:

    def test_coefficients(self):
        solution = couette(2.0, 5.0)
        assert solution.a_coef == pytest.approx(12.0 / 11.0)
        assert solution.b_coef == pytest.approx(-300.0 / 11.0)

    def test_wall_values(self):
        solution = couette(2.0, 5.0)
        assert solution.velocity(0.0) == pytest.approx(0.0, abs=1e-12)
        assert solution.velocity(1.0) == pytest.approx(2.0)

    def test_walls_at_rest(self):
        grid = build_grid(11, 5.0)
        np.testing.assert_array_equal(couette(0.0, 5.0).sample(grid), 0.0)

    def test_discrete_residual_shrinks(self):
        residuals = []
        for n in (51, 101):
            grid = build_grid(n, 5.0)
            residuals.append(np.max(np.abs(div_theta(grid, np.ones(n), couette(2.0, 5.0).sample(grid)))))
        assert residuals[1] < residuals[0] / 3.5

    def test_invalid_input(self):
        with pytest.raises(ParameterError):
            couette(float('inf'), 5.0)
        with pytest.raises(ParameterError):
            couette(1.0, 0.0)


class TestPoiseuille:

    def test_no_forcing(self):
        np.testing.assert_array_equal(poiseuille_annulus(0.0, 5.0).velocity(np.linspace(0, 1, 5)), 0.0)

    def test_no_slip(self):
        solution = poiseuille_annulus(1.0, 5.0, re=10.0)
        assert solution.velocity(0.0) == pytest.approx(0.0, abs=1e-10)
        assert solution.velocity(1.0) == pytest.approx(0.0, abs=1e-10)

    def test_peak_location(self):
        solution = poiseuille_annulus(1.0, 5.0)
        expected = math.sqrt(11.0 / (2.0 * math.log(6.0 / 5.0))) - 5.0
        assert solution.peak_r_hat == pytest.approx(expected)
        assert 0.45 < solution.peak_r_hat < 0.5

        r = np.linspace(0.0, 1.0, 2001)
        w = solution.velocity(r)
        assert r[np.argmax(w)] == pytest.approx(expected, abs=1e-3)

    def test_solves_forced_momentum_balance(self):
        grid = build_grid(101, 5.0)
        w = poiseuille_annulus(1.0, 5.0, re=10.0).sample(grid)
        residual = div_z(grid, np.ones(grid.n_nodes), w) / 10.0 + 1.0
        assert np.max(np.abs(residual)) < 1e-4

    def test_invalid_input(self):
        with pytest.raises(ParameterError):
            poiseuille_annulus(1.0, 5.0, re=0.0)


class TestDensePropagator:

    def test_zero_operator(self):
        np.testing.assert_allclose(dense_propagator(np.zeros((4, 4)), 1.0), np.eye(4))

    def test_scalar_decay(self):
        assert dense_propagator([[-1.0]], 1.0)[0, 0] == pytest.approx(math.exp(-1.0))

    def test_size_limit(self):
        n = MAX_DENSE_SIZE + 1
        with pytest.raises(OracleSizeError):
            dense_propagator(np.zeros((n, n)), 1.0)

    def test_not_square(self):
        with pytest.raises(ParameterError):
            dense_propagator(np.zeros((2, 3)), 1.0)

    def test_fine_steps_agree(self):
        rng = np.random.default_rng(3)
        q, _ = np.linalg.qr(rng.normal(size=(8, 8)))
        matrix = q @ np.diag(-np.linspace(0.5, 2.0, 8)) @ q.T
        u0 = rng.normal(size=8)
        approx = TRBDF2Integrator(LinearODESystem(matrix)).integrate_fixed(u0, 0.0, 0.2, 2.5e-4)
        np.testing.assert_allclose(approx, dense_propagator(matrix, 0.2) @ u0, atol=1e-7)


class TestDiffusionMatrix:

    def test_constants_are_stationary(self):
        grid = build_grid(11, 5.0)
        for outer in ('dirichlet', 'neumann'):
            np.testing.assert_allclose(diffusion_matrix(grid, 100.0, outer) @ np.ones(11), 0.0, atol=1e-12)

    def test_dirichlet_row_is_zero(self):
        matrix = diffusion_matrix(build_grid(11, 5.0), 100.0)
        np.testing.assert_array_equal(matrix[-1], 0.0)

    def test_size_limit(self):
        with pytest.raises(OracleSizeError):
            diffusion_matrix(build_grid(MAX_DENSE_SIZE + 1, 5.0), 100.0)

    def test_unknown_outer_condition(self):
        with pytest.raises(ParameterError):
            diffusion_matrix(build_grid(11, 5.0), 100.0, 'robin')
