"""
Residual assembly: semi-discrete right-hand side dU/dt = R(U, t) and its
banded Jacobian for the coupled (v, w, c) system

Unknowns are interleaved per node, U = [v_0, w_0, c_0, v_1, w_1, c_1, ...], so
nearest-neighbour coupling stays within a half-bandwidth of 5.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from modules.constitutive import ConstitutiveModel, ShearState, apparent_viscosity, stress_power
from modules.errors import AlignmentError, ParameterError
from modules.forcing import BcKind, BcMode, BoundaryForcing, OuterConcentrationBc, WallDrive
from modules.grid import (
    RadialGrid, axial_flux, axial_shear, flux_divergence, neumann_boundary_value,
    theta_flux, theta_shear, to_half_nodes,
)

logger = logging.getLogger(__name__)

N_FIELDS = 3
HALF_BANDWIDTH = 5

# ============================================================================
# PARAMETERS AND STATE
# ============================================================================

@dataclass(frozen=True)
class NondimParams:
    """Dimensionless parameter group of the governing equations"""

    re: float
    pe: float
    p_f: float
    p_g: float
    p_gamma: float
    p_beta: float
    p_a: float = 0.0
    p_b: float = 0.0

    def __post_init__(self):
        for name in ('re', 'pe', 'p_f', 'p_g', 'p_gamma', 'p_beta', 'p_a', 'p_b'):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        for name in ('re', 'pe', 'p_g'):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0 (got {getattr(self, name)})")
        for name in ('p_gamma', 'p_beta'):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0 (got {getattr(self, name)})")

    @property
    def forcing_vanishes_at_rest(self) -> bool:
        """True when p_A = -p_B, so the forcing is zero at t = 0"""
        return math.isclose(self.p_a, -self.p_b, rel_tol=1e-12, abs_tol=1e-15)

    def as_dict(self) -> dict:
        return {name: getattr(self, name)
                for name in ('re', 'pe', 'p_f', 'p_g', 'p_gamma', 'p_beta', 'p_a', 'p_b')}


@dataclass
class StateVector:
    """Nodal values of (v, w, c) at one instant t"""

    v: np.ndarray
    w: np.ndarray
    c: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if not (self.v.shape == self.w.shape == self.c.shape) or self.v.ndim != 1:
            raise AlignmentError("v, w and c profiles must be 1-D and share one grid")

    @property
    def n_nodes(self) -> int:
        return self.v.size

    def to_vector(self) -> np.ndarray:
        """Interleaved unknown vector [v_0, w_0, c_0, v_1, ...]"""
        return np.column_stack((self.v, self.w, self.c)).ravel()

    @classmethod
    def from_vector(cls, u: np.ndarray, t: float = 0.0) -> "StateVector":
        fields = np.asarray(u, dtype=float).reshape(-1, N_FIELDS)
        return cls(v=fields[:, 0].copy(), w=fields[:, 1].copy(), c=fields[:, 2].copy(), t=t)

    @classmethod
    def rest(cls, n_nodes: int, c0: float, t: float = 0.0) -> "StateVector":
        """Fluid at rest with uniform concentration c0"""
        return cls(v=np.zeros(n_nodes), w=np.zeros(n_nodes), c=np.full(n_nodes, c0), t=t)

# ============================================================================
# SEMI-DISCRETE SYSTEM
# ============================================================================

class SemiDiscreteSystem:
    """
    Method-of-lines form of the coupled momentum / concentration equations

    Boundary rows of rhs() carry the time derivative of the boundary data;
    dirichlet() lists those rows with their values so the integrator can impose
    them algebraically.
    """

    def __init__(self, grid: RadialGrid, model: ConstitutiveModel, params: NondimParams,
                 bc_mode: Optional[BcMode] = None, wall: Optional[WallDrive] = None):
        """
        Initialize the system

        Args:
            grid: Radial grid
            model: Constitutive model
            params: Dimensionless parameters (params.p_g must match grid.p_g)
            bc_mode: Outer concentration regime
            wall: Outer-wall drive
        """
        if not math.isclose(grid.p_g, params.p_g, rel_tol=1e-12):
            raise ParameterError(f"grid p_g ({grid.p_g}) differs from params p_g ({params.p_g})")

        self.grid = grid
        self.model = model
        self.params = params
        self.forcing = BoundaryForcing(grid, params.p_a, params.p_b, params.p_f, bc_mode, wall)
        self.size = N_FIELDS * grid.n_nodes
        self.bandwidth = (HALF_BANDWIDTH, HALF_BANDWIDTH)
        self.n_rhs_evaluations = 0
        self.n_jacobians = 0
        self.logger = logging.getLogger(__name__)

        self._rho = grid.rho
        self._frozen_outer: Optional[OuterConcentrationBc] = None

        last = grid.n_nodes - 1
        self._velocity_rows = np.array([0, N_FIELDS * last, 1, N_FIELDS * last + 1])
        self._outer_c_row = N_FIELDS * last + 2

    # ------------------------------------------------------------------
    # Boundary handling
    # ------------------------------------------------------------------

    @property
    def bc_mode(self) -> BcMode:
        return self.forcing.bc_mode

    def begin_step(self, u: np.ndarray, t: float):
        """Freeze the feedback-switch branch from the last accepted state"""
        if self.bc_mode.kind is not BcKind.FEEDBACK:
            return
        c = np.asarray(u, dtype=float)[2::N_FIELDS]
        branch = self.forcing.outer_bc(c, t)
        if self._frozen_outer is None or branch.is_dirichlet != self._frozen_outer.is_dirichlet:
            kind = "Dirichlet c_tilde" if branch.is_dirichlet else "zero flux"
            self.logger.debug(f"Outer concentration switched to {kind} at t_hat={t:.6g}")
        self._frozen_outer = branch

    def outer_concentration_bc(self, c: np.ndarray, t: float) -> OuterConcentrationBc:
        if self.bc_mode.kind is BcKind.FEEDBACK and self._frozen_outer is not None:
            return self._frozen_outer
        return self.forcing.outer_bc(c, t)

    def dirichlet(self, t: float, u: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Rows carrying Dirichlet conditions and their values at time t

        Returns:
            (row indices, values) into the interleaved unknown vector
        """
        values = [0.0, self.forcing.wall.velocity(t), 0.0, 0.0]
        c = None if u is None else np.asarray(u, dtype=float)[2::N_FIELDS]
        outer = self.outer_concentration_bc(c, t)
        if outer.is_dirichlet:
            return np.append(self._velocity_rows, self._outer_c_row), np.array(values + [outer.value])
        return self._velocity_rows.copy(), np.array(values)

    def breakpoints(self, t_end: float):
        return self.forcing.breakpoints(t_end)

    # ------------------------------------------------------------------
    # Viscosity
    # ------------------------------------------------------------------

    def half_node_viscosity(self, v: np.ndarray, w: np.ndarray, c: np.ndarray) -> np.ndarray:
        """mu_hat at half-nodes from half-node c and the two shear measures"""
        shear = ShearState(theta_shear(self.grid, v), axial_shear(self.grid, w))
        return apparent_viscosity(self.model, self.params.p_beta, self.params.p_gamma,
                                  to_half_nodes(c, 'arithmetic'), shear)

    def nodal_shear(self, v: np.ndarray, w: np.ndarray) -> ShearState:
        """Shear measures at the nodes (second-order one-sided at the walls)"""
        h = self.grid.h
        s_theta = np.gradient(v, h, edge_order=2) - v / self._rho
        return ShearState(s_theta, np.gradient(w, h, edge_order=2))

    def nodal_viscosity(self, v: np.ndarray, w: np.ndarray, c: np.ndarray) -> np.ndarray:
        return apparent_viscosity(self.model, self.params.p_beta, self.params.p_gamma,
                                  c, self.nodal_shear(v, w))

    def nodal_stress_power(self, v: np.ndarray, w: np.ndarray, c: np.ndarray) -> np.ndarray:
        shear = self.nodal_shear(v, w)
        mu = apparent_viscosity(self.model, self.params.p_beta, self.params.p_gamma, c, shear)
        return stress_power(mu, shear)

    # ------------------------------------------------------------------
    # Right-hand side and Jacobian
    # ------------------------------------------------------------------

    def rhs_fields(self, u: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Time derivatives (dv/dt, dw/dt, dc/dt) as separate nodal profiles"""
        fields = np.asarray(u, dtype=float).reshape(-1, N_FIELDS)
        if fields.shape[0] != self.grid.n_nodes:
            raise AlignmentError(f"state has {fields.shape[0]} nodes, grid has {self.grid.n_nodes}")
        v, w, c = fields[:, 0], fields[:, 1], fields[:, 2]
        grid, params = self.grid, self.params
        self.n_rhs_evaluations += 1

        mu_half = self.half_node_viscosity(v, w, c)

        dv = np.zeros(grid.n_nodes)
        dw = np.zeros(grid.n_nodes)
        dc = np.zeros(grid.n_nodes)

        dv[1:-1] = flux_divergence(grid, theta_flux(grid, mu_half, v), self._rho ** 2) / params.re
        dv[-1] = self.forcing.wall.rate(t)

        dw[1:-1] = (flux_divergence(grid, axial_flux(grid, mu_half, w), self._rho) / params.re
                    + self.forcing.pressure(t))

        c_flux = axial_flux(grid, np.ones(grid.n_nodes - 1), c)
        dc[1:-1] = flux_divergence(grid, c_flux, self._rho) / params.pe
        dc[0] = neumann_boundary_value(grid, c, 'inner') / params.pe
        outer = self.outer_concentration_bc(c, t)
        if outer.is_dirichlet:
            dc[-1] = self.forcing.outer_c_rate(t)
        else:
            dc[-1] = neumann_boundary_value(grid, c, 'outer') / params.pe

        return dv, dw, dc

    def rhs(self, u: np.ndarray, t: float) -> np.ndarray:
        """Interleaved time derivative dU/dt"""
        dv, dw, dc = self.rhs_fields(u, t)
        return np.column_stack((dv, dw, dc)).ravel()

    def jacobian(self, u: np.ndarray, t: float) -> np.ndarray:
        """
        Banded finite-difference Jacobian of rhs()

        Columns more than a full band apart never share a row, so they are
        perturbed together: 2*HALF_BANDWIDTH + 1 rhs evaluations per Jacobian.

        Returns:
            Matrix in scipy.linalg.solve_banded layout, ab[upper + i - j, j] = J[i, j]
        """
        u = np.asarray(u, dtype=float)
        n = u.size
        lower, upper = self.bandwidth
        width = lower + upper + 1
        self.n_jacobians += 1

        f0 = self.rhs(u, t)
        steps = math.sqrt(np.finfo(float).eps) * np.maximum(1.0, np.abs(u))
        ab = np.zeros((width, n))

        for group in range(width):
            cols = np.arange(group, n, width)
            perturbed = u.copy()
            perturbed[cols] += steps[cols]
            actual = perturbed[cols] - u[cols]
            df = self.rhs(perturbed, t) - f0

            for offset in range(-upper, lower + 1):
                rows = cols + offset
                valid = (rows >= 0) & (rows < n)
                ab[upper + offset, cols[valid]] = df[rows[valid]] / actual[valid]

        return ab

# ============================================================================
# CONVENIENCE FUNCTIONS
# ============================================================================

def rhs(state: StateVector, grid: RadialGrid, model: ConstitutiveModel, params: NondimParams,
        bc_mode: Optional[BcMode] = None,
        wall: Optional[WallDrive] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Time-derivative profiles (dv/dt, dw/dt, dc/dt) of a state

    Args:
        state: State at time state.t
        grid: Radial grid
        model: Constitutive model
        params: Dimensionless parameters
        bc_mode: Outer concentration regime

    Returns:
        Tuple of nodal derivative profiles
    """
    system = SemiDiscreteSystem(grid, model, params, bc_mode, wall)
    return system.rhs_fields(state.to_vector(), state.t)


def jacobian(state: StateVector, grid: RadialGrid, model: ConstitutiveModel, params: NondimParams,
             bc_mode: Optional[BcMode] = None, wall: Optional[WallDrive] = None) -> np.ndarray:
    """Banded Jacobian of rhs() at a state (solve_banded layout, half-bandwidth 5)"""
    system = SemiDiscreteSystem(grid, model, params, bc_mode, wall)
    return system.jacobian(state.to_vector(), state.t)


def banded_to_dense(ab: np.ndarray, lower: int, upper: int) -> np.ndarray:
    """Expand a solve_banded-layout matrix to a dense square matrix"""
    n = ab.shape[1]
    dense = np.zeros((n, n))
    for offset in range(-upper, lower + 1):
        cols = np.arange(n)
        rows = cols + offset
        valid = (rows >= 0) & (rows < n)
        dense[rows[valid], cols[valid]] = ab[upper + offset, cols[valid]]
    return dense
