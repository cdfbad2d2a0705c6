"""
Uniform radial grid and conservative discrete transport operators

Operators return values at interior nodes only (length n_nodes - 2). Each is a
flux difference: fluxes live on half-nodes r_{j+1/2}, and the value at node j is
(F_{j+1/2} - F_{j-1/2}) / (h * metric_j).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

import config
from modules.errors import AlignmentError, ParameterError

logger = logging.getLogger(__name__)

# ============================================================================
# GRID
# ============================================================================

@dataclass(frozen=True)
class RadialGrid:
    """N uniformly spaced nodes on r_hat in [0, 1] with geometric offset p_g"""

    n_nodes: int
    p_g: float

    @property
    def h(self) -> float:
        return 1.0 / (self.n_nodes - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n_nodes) * self.h

    @property
    def half_nodes(self) -> np.ndarray:
        return (np.arange(self.n_nodes - 1) + 0.5) * self.h

    @property
    def rho(self) -> np.ndarray:
        """Shifted radius r_hat + p_g at the nodes"""
        return self.nodes + self.p_g

    @property
    def rho_half(self) -> np.ndarray:
        return self.half_nodes + self.p_g

    def check_profile(self, values, name: str = "profile") -> np.ndarray:
        """
        Return values as a float array, verifying alignment and finiteness

        Raises:
            AlignmentError: Length differs from n_nodes
            ParameterError: Non-finite entries
        """
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.n_nodes,):
            raise AlignmentError(f"{name} has shape {arr.shape}, grid has {self.n_nodes} nodes")
        if not np.all(np.isfinite(arr)):
            raise ParameterError(f"{name} contains non-finite values")
        return arr


def build_grid(n_nodes: int, p_g: float) -> RadialGrid:
    """
    Build the uniform radial grid

    Args:
        n_nodes: Number of nodes (>= 5)
        p_g: Geometric offset r_i / (r_o - r_i), > 0

    Returns:
        RadialGrid

    Raises:
        ParameterError: Too few nodes or non-positive offset
    """
    if int(n_nodes) != n_nodes or n_nodes < config.MIN_N_NODES:
        raise ParameterError(f"n_nodes must be an integer >= {config.MIN_N_NODES} (got {n_nodes})")
    if not (p_g > 0 and np.isfinite(p_g)):
        raise ParameterError(f"p_g must be a positive number (got {p_g})")

    grid = RadialGrid(n_nodes=int(n_nodes), p_g=float(p_g))
    logger.debug(f"Built radial grid: N={grid.n_nodes}, h={grid.h:.6g}, p_g={grid.p_g:g}")
    return grid

# ============================================================================
# HALF-NODE INTERPOLATION
# ============================================================================

def to_half_nodes(values: np.ndarray, mean: Optional[str] = None) -> np.ndarray:
    """
    Interpolate nodal values to half-nodes

    Args:
        values: Nodal values
        mean: 'arithmetic' (default from config) or 'harmonic'
    """
    mean = mean or config.HALF_NODE_MEAN
    left, right = values[:-1], values[1:]
    if mean == 'arithmetic':
        return 0.5 * (left + right)
    if mean == 'harmonic':
        return 2.0 * left * right / (left + right)
    raise ParameterError(f"unknown half-node mean '{mean}'")


def _viscosity_at_half_nodes(grid: RadialGrid, mu_profile, mean: Optional[str]) -> np.ndarray:
    mu = np.asarray(mu_profile, dtype=float)
    if mu.shape == (grid.n_nodes - 1,):
        return mu
    mu = grid.check_profile(mu, "mu_profile")
    return to_half_nodes(mu, mean)

# ============================================================================
# FLUXES
# ============================================================================

def theta_shear(grid: RadialGrid, v: np.ndarray) -> np.ndarray:
    """s_theta = dv/dr - v/(r + p_g) at half-nodes"""
    return np.diff(v) / grid.h - 0.5 * (v[:-1] + v[1:]) / grid.rho_half


def axial_shear(grid: RadialGrid, w: np.ndarray) -> np.ndarray:
    """s_z = dw/dr at half-nodes"""
    return np.diff(w) / grid.h


def theta_flux(grid: RadialGrid, mu_half: np.ndarray, v: np.ndarray) -> np.ndarray:
    """F = (r + p_g)^2 * mu * s_theta at half-nodes"""
    return grid.rho_half ** 2 * mu_half * theta_shear(grid, v)


def axial_flux(grid: RadialGrid, mu_half: np.ndarray, w: np.ndarray) -> np.ndarray:
    """F = (r + p_g) * mu * dw/dr at half-nodes"""
    return grid.rho_half * mu_half * axial_shear(grid, w)


def flux_divergence(grid: RadialGrid, flux: np.ndarray, metric: np.ndarray) -> np.ndarray:
    return np.diff(flux) / (grid.h * metric[1:-1])

# ============================================================================
# OPERATORS
# ============================================================================

def div_theta(grid: RadialGrid, mu_profile, v_profile, mean: Optional[str] = None) -> np.ndarray:
    """
    Azimuthal momentum operator
    (1/(r+p_g)^2) d/dr[(r+p_g)^2 mu (dv/dr - v/(r+p_g))] at interior nodes

    Args:
        grid: Radial grid
        mu_profile: Viscosity at nodes (length N) or half-nodes (length N-1)
        v_profile: Azimuthal velocity at nodes
        mean: Half-node interpolation policy for nodal mu

    Returns:
        Operator values at nodes 1..N-2
    """
    v = grid.check_profile(v_profile, "v_profile")
    mu_half = _viscosity_at_half_nodes(grid, mu_profile, mean)
    return flux_divergence(grid, theta_flux(grid, mu_half, v), grid.rho ** 2)


def div_z(grid: RadialGrid, mu_profile, w_profile, mean: Optional[str] = None) -> np.ndarray:
    """Axial momentum operator (1/(r+p_g)) d/dr[(r+p_g) mu dw/dr] at interior nodes"""
    w = grid.check_profile(w_profile, "w_profile")
    mu_half = _viscosity_at_half_nodes(grid, mu_profile, mean)
    return flux_divergence(grid, axial_flux(grid, mu_half, w), grid.rho)


def div_c(grid: RadialGrid, c_profile) -> np.ndarray:
    """Concentration operator (1/(r+p_g)) d/dr[(r+p_g) dc/dr] at interior nodes"""
    c = grid.check_profile(c_profile, "c_profile")
    return flux_divergence(grid, axial_flux(grid, np.ones(grid.n_nodes - 1), c), grid.rho)


def neumann_boundary_value(grid: RadialGrid, c_profile, side: str) -> float:
    """
    div_c at a boundary node carrying a zero-flux condition

    A ghost node mirrored across the boundary reduces the flux difference to
    2 (c_neighbour - c_boundary) / h^2, second order.
    """
    c = np.asarray(c_profile, dtype=float)
    if side == 'inner':
        return 2.0 * (c[1] - c[0]) / grid.h ** 2
    if side == 'outer':
        return 2.0 * (c[-2] - c[-1]) / grid.h ** 2
    raise ParameterError(f"unknown boundary side '{side}'")
