"""
Tests for the radial grid and the conservative operators
"""

import numpy as np
import pytest

from modules.errors import AlignmentError, ParameterError
from modules.grid import (
    axial_flux, build_grid, div_c, div_theta, div_z, neumann_boundary_value, to_half_nodes,
)


def test_build_grid():
    grid = build_grid(11, 5.0)
    assert grid.h == pytest.approx(0.1)
    assert grid.nodes[0] == 0.0
    assert grid.nodes[-1] == pytest.approx(1.0)
    assert grid.rho[0] == 5.0
    assert grid.half_nodes.size == 10


@pytest.mark.parametrize("n_nodes, p_g", [(4, 5.0), (10.5, 5.0), (11, 0.0), (11, -1.0)])
def test_build_grid_rejects(n_nodes, p_g):
    with pytest.raises(ParameterError):
        build_grid(n_nodes, p_g)


def test_profile_alignment(small_grid):
    with pytest.raises(AlignmentError):
        div_c(small_grid, np.zeros(small_grid.n_nodes + 1))


def test_non_finite_profile(small_grid):
    c = np.full(small_grid.n_nodes, 0.1)
    c[3] = np.nan
    with pytest.raises(ParameterError):
        div_c(small_grid, c)


def test_div_c_constant_is_zero(small_grid):
    np.testing.assert_array_equal(div_c(small_grid, np.full(small_grid.n_nodes, 0.3)), 0.0)


def test_div_c_exact_on_quadratic(small_grid):
    r, rho = small_grid.nodes, small_grid.rho
    expected = (4.0 * r + 2.0 * small_grid.p_g) / rho
    np.testing.assert_allclose(div_c(small_grid, r ** 2), expected[1:-1], rtol=1e-10)


def test_div_c_is_conservative(small_grid):
    c = np.sin(3.0 * small_grid.nodes) + 0.5
    flux = axial_flux(small_grid, np.ones(small_grid.n_nodes - 1), c)
    total = np.sum(small_grid.h * small_grid.rho[1:-1] * div_c(small_grid, c))
    assert total == pytest.approx(flux[-1] - flux[0], abs=1e-12)


def test_div_theta_rigid_rotation(small_grid):
    ones = np.ones(small_grid.n_nodes)
    np.testing.assert_allclose(div_theta(small_grid, ones, small_grid.rho), 0.0, atol=1e-10)


def test_div_theta_second_order_on_couette():
    residuals = []
    for n in (21, 41):
        grid = build_grid(n, 5.0)
        v = 1.0 / grid.rho
        residuals.append(np.max(np.abs(div_theta(grid, np.ones(n), v))))
    assert 3.5 <= residuals[0] / residuals[1] <= 4.5


def test_half_node_viscosity_accepted(small_grid):
    v = small_grid.nodes ** 2
    nodal = div_theta(small_grid, np.full(small_grid.n_nodes, 2.0), v)
    half = div_theta(small_grid, np.full(small_grid.n_nodes - 1, 2.0), v)
    np.testing.assert_allclose(nodal, half)


def test_div_z_scales_with_viscosity(small_grid):
    w = small_grid.nodes * (1.0 - small_grid.nodes)
    base = div_z(small_grid, np.ones(small_grid.n_nodes), w)
    np.testing.assert_allclose(div_z(small_grid, np.full(small_grid.n_nodes, 3.0), w), 3.0 * base)


def test_means_agree_on_constant():
    values = np.full(6, 2.5)
    np.testing.assert_allclose(to_half_nodes(values, 'harmonic'), to_half_nodes(values, 'arithmetic'))


def test_harmonic_mean():
    assert to_half_nodes(np.array([1.0, 3.0]), 'harmonic')[0] == pytest.approx(1.5)


def test_unknown_mean():
    with pytest.raises(ParameterError):
        to_half_nodes(np.ones(3), 'geometric')


def test_neumann_boundary_value(small_grid):
    c = small_grid.nodes ** 2
    assert neumann_boundary_value(small_grid, c, 'inner') == pytest.approx(2.0)
    with pytest.raises(ParameterError):
        neumann_boundary_value(small_grid, c, 'middle')
