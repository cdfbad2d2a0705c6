"""
Reference solutions for verification: steady Newtonian Couette and annular
Poiseuille profiles, and a dense matrix-exponential propagator for small
linear systems
"""

import math
import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from modules.errors import OracleSizeError, ParameterError
from modules.grid import RadialGrid, div_c, neumann_boundary_value

logger = logging.getLogger(__name__)

MAX_DENSE_SIZE = 64

# ============================================================================
# STEADY NEWTONIAN PROFILES
# ============================================================================

@dataclass(frozen=True)
class CouetteSolution:
    """Steady circular Couette flow v(rho) = a*rho + b/rho, rho = r_hat + p_g"""

    a_coef: float
    b_coef: float
    p_g: float

    def velocity(self, r_hat) -> np.ndarray:
        rho = np.asarray(r_hat, dtype=float) + self.p_g
        return self.a_coef * rho + self.b_coef / rho

    def sample(self, grid: RadialGrid) -> np.ndarray:
        return self.velocity(grid.nodes)


def couette(wall_value: float, p_g: float) -> CouetteSolution:
    """
    Steady azimuthal flow with the inner wall at rest and the outer wall at wall_value

    Raises:
        ParameterError: Non-finite wall value or p_g <= 0
    """
    if not math.isfinite(wall_value):
        raise ParameterError(f"wall_value must be finite (got {wall_value})")
    if not p_g > 0:
        raise ParameterError(f"p_g must be > 0 (got {p_g})")

    rho_i, rho_o = p_g, p_g + 1.0
    a = wall_value * rho_o / (rho_o ** 2 - rho_i ** 2)
    return CouetteSolution(a_coef=a, b_coef=-a * rho_i ** 2, p_g=p_g)


@dataclass(frozen=True)
class PoiseuilleSolution:
    """
    Steady axial flow driven by a constant forcing between fixed walls

    gradient_g is the Reynolds-scaled forcing G = Re * G_f, so that
    (1/Re) div_z(w) + G_f = 0.
    """

    gradient_g: float
    p_g: float

    @property
    def _log_ratio(self) -> float:
        return math.log((self.p_g + 1.0) / self.p_g)

    def velocity(self, r_hat) -> np.ndarray:
        rho = np.asarray(r_hat, dtype=float) + self.p_g
        rho_i, rho_o = self.p_g, self.p_g + 1.0
        return (self.gradient_g / 4.0) * (rho_o ** 2 - rho ** 2
                                          + (rho_o ** 2 - rho_i ** 2) * np.log(rho / rho_o) / self._log_ratio)

    def sample(self, grid: RadialGrid) -> np.ndarray:
        return self.velocity(grid.nodes)

    @property
    def peak_r_hat(self) -> float:
        """Radius of the velocity extremum, rho*^2 = (rho_o^2 - rho_i^2) / (2 ln(rho_o/rho_i))"""
        rho_i, rho_o = self.p_g, self.p_g + 1.0
        return math.sqrt((rho_o ** 2 - rho_i ** 2) / (2.0 * self._log_ratio)) - self.p_g


def poiseuille_annulus(gradient_g: float, p_g: float, re: float = 1.0) -> PoiseuilleSolution:
    """
    Annular Poiseuille profile for axial forcing gradient_g at Reynolds number re

    Args:
        gradient_g: Constant axial forcing G_f
        p_g: Geometric offset
        re: Reynolds number multiplying the forcing

    Raises:
        ParameterError: p_g <= 0 or re <= 0
    """
    if not p_g > 0:
        raise ParameterError(f"p_g must be > 0 (got {p_g})")
    if not re > 0:
        raise ParameterError(f"re must be > 0 (got {re})")
    return PoiseuilleSolution(gradient_g=re * gradient_g, p_g=p_g)

# ============================================================================
# LINEAR REFERENCES
# ============================================================================

def dense_propagator(matrix, dt: float) -> np.ndarray:
    """
    exp(dt * A) for a small dense operator A

    Raises:
        OracleSizeError: A larger than MAX_DENSE_SIZE
        ParameterError: A not square
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ParameterError(f"operator must be square (got shape {a.shape})")
    if a.shape[0] > MAX_DENSE_SIZE:
        raise OracleSizeError(f"dense propagator limited to {MAX_DENSE_SIZE} unknowns (got {a.shape[0]})")
    return expm(dt * a)


def diffusion_matrix(grid: RadialGrid, pe: float, outer: str = 'dirichlet') -> np.ndarray:
    """
    Dense matrix of the discrete concentration operator (1/Pe) div_c

    The inner wall is zero-flux. A Dirichlet outer wall gives a zero row (the
    boundary value is held); 'neumann' makes it zero-flux as well.
    """
    if grid.n_nodes > MAX_DENSE_SIZE:
        raise OracleSizeError(f"dense operator limited to {MAX_DENSE_SIZE} nodes (got {grid.n_nodes})")
    if outer not in ('dirichlet', 'neumann'):
        raise ParameterError(f"unknown outer condition '{outer}'")

    n = grid.n_nodes
    matrix = np.zeros((n, n))
    for k in range(n):
        basis = np.zeros(n)
        basis[k] = 1.0
        matrix[1:-1, k] = div_c(grid, basis)
        matrix[0, k] = neumann_boundary_value(grid, basis, 'inner')
        if outer == 'neumann':
            matrix[-1, k] = neumann_boundary_value(grid, basis, 'outer')
    return matrix / pe


class LinearODESystem:
    """
    du/dt = A u as a system the TR-BDF2 integrator can advance

    The Jacobian is returned in banded layout with full bandwidth, so any
    dense A works.
    """

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        n = self.matrix.shape[0]
        self.size = n
        self.bandwidth = (n - 1, n - 1)
        self.n_rhs_evaluations = 0
        self.n_jacobians = 0

    def rhs(self, u: np.ndarray, t: float) -> np.ndarray:
        self.n_rhs_evaluations += 1
        return self.matrix @ u

    def jacobian(self, u: np.ndarray, t: float) -> np.ndarray:
        self.n_jacobians += 1
        n = self.size
        lower, upper = self.bandwidth
        ab = np.zeros((lower + upper + 1, n))
        for i in range(n):
            for j in range(n):
                ab[upper + i - j, j] = self.matrix[i, j]
        return ab

    def dirichlet(self, t: float, u=None):
        return np.array([], dtype=int), np.array([])

    def begin_step(self, u: np.ndarray, t: float):
        pass

    def breakpoints(self, t_end: float):
        return []
