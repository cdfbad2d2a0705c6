"""
Boundary and volumetric forcing: wall drive, axial pressure gradient,
outer concentration ramp and the feedback-switch outer condition
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
from scipy.integrate import trapezoid

import config
from modules.errors import ParameterError
from modules.grid import RadialGrid

logger = logging.getLogger(__name__)

# ============================================================================
# RECORDS
# ============================================================================

class BcKind(Enum):
    """Outer concentration regimes"""

    RAMP = "ramp"
    FEEDBACK = "feedback"
    FIXED = "fixed"  # constant Dirichlet c_tilde, for verification runs


class WallKind(Enum):
    """Outer-wall azimuthal velocity drives"""

    OSCILLATING = "oscillating"
    CONSTANT = "constant"
    NONE = "none"


@dataclass(frozen=True)
class BcMode:
    """Outer concentration condition and the feedback-switch data"""

    kind: BcKind = BcKind.RAMP
    c_tilde: float = config.FEEDBACK_C_TILDE
    c_bar: float = config.FEEDBACK_C_BAR
    r_bar_hat: float = config.FEEDBACK_R_BAR_HAT

    def __post_init__(self):
        if not 0.0 <= self.c_tilde <= 1.0:
            raise ParameterError(f"c_tilde must lie in [0, 1] (got {self.c_tilde})")
        if not 0.0 <= self.c_bar <= 1.0:
            raise ParameterError(f"c_bar must lie in [0, 1] (got {self.c_bar})")
        if not 0.0 <= self.r_bar_hat < 1.0:
            raise ParameterError(f"r_bar_hat must lie in [0, 1) (got {self.r_bar_hat})")


@dataclass(frozen=True)
class WallDrive:
    """Azimuthal velocity of the outer wall"""

    kind: WallKind = WallKind.OSCILLATING
    value: float = 0.0  # held value for WallKind.CONSTANT

    def velocity(self, t_hat: float) -> float:
        if self.kind is WallKind.OSCILLATING:
            return wall_velocity(t_hat)
        if self.kind is WallKind.CONSTANT:
            return self.value
        return 0.0

    def rate(self, t_hat: float) -> float:
        """Time derivative of velocity(t_hat)"""
        if self.kind is WallKind.OSCILLATING:
            return math.sin(t_hat)
        return 0.0


@dataclass(frozen=True)
class OuterConcentrationBc:
    """Boundary row descriptor: Dirichlet value, or zero flux when value is None"""

    value: Optional[float] = None

    @property
    def is_dirichlet(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class ForcingRecord:
    wall_velocity: float
    pressure_forcing: float
    outer_c: OuterConcentrationBc

# ============================================================================
# ELEMENTARY FORCING FUNCTIONS
# ============================================================================

def wall_velocity(t_hat: float) -> float:
    """Oscillating outer-wall velocity 1 - cos(t_hat)"""
    return 1.0 - math.cos(t_hat)


def pressure_forcing(t_hat: float, p_a: float, p_b: float, p_f: float) -> float:
    """Axial pressure-gradient forcing p_A + p_B cos(p_f t_hat)"""
    return p_a + p_b * math.cos(p_f * t_hat)


def outer_concentration_ramp(t_hat: float) -> float:
    """Outer concentration: linear ramp from 0.1 to 0.3 over t_hat in [0, 2], then held"""
    if t_hat < config.RAMP_END_TIME:
        return config.RAMP_START + config.RAMP_SLOPE * t_hat
    return config.RAMP_PLATEAU


def outer_concentration_ramp_rate(t_hat: float) -> float:
    return config.RAMP_SLOPE if t_hat < config.RAMP_END_TIME else 0.0


def mean_concentration(c_profile, grid: RadialGrid, r_bar_hat: float) -> float:
    """
    Average of c over the layer [r_bar_hat, 1] adjacent to the outer wall

    Trapezoidal rule on the nodes inside the layer; the partial cell at
    r_bar_hat uses the linearly interpolated value there.

    Args:
        c_profile: Nodal concentration
        grid: Radial grid
        r_bar_hat: Inner edge of the layer, in [0, 1)

    Returns:
        Layer-mean concentration
    """
    if not 0.0 <= r_bar_hat < 1.0:
        raise ParameterError(f"r_bar_hat must lie in [0, 1) (got {r_bar_hat})")

    c = grid.check_profile(c_profile, "c_profile")
    r = grid.nodes
    inside = r > r_bar_hat
    rr = np.concatenate(([r_bar_hat], r[inside]))
    cc = np.concatenate(([np.interp(r_bar_hat, r, c)], c[inside]))
    return float(trapezoid(cc, rr) / (1.0 - r_bar_hat))


def feedback_outer_bc(c_profile, grid: RadialGrid, mode: BcMode) -> OuterConcentrationBc:
    """
    Outer concentration condition under the feedback switch

    Secretion (Dirichlet c_tilde) continues while the layer mean is below the
    optimum c_bar; at or above it the wall becomes zero-flux.
    """
    if mode.kind is not BcKind.FEEDBACK:
        raise ParameterError(f"feedback_outer_bc needs a feedback mode (got {mode.kind.value})")

    c_mean = mean_concentration(c_profile, grid, mode.r_bar_hat)
    if c_mean < mode.c_bar:
        return OuterConcentrationBc(value=mode.c_tilde)
    return OuterConcentrationBc(value=None)

# ============================================================================
# BOUNDARY FORCING
# ============================================================================

class BoundaryForcing:
    """All time-dependent boundary data and volumetric forcing of one study"""

    def __init__(self, grid: RadialGrid, p_a: float, p_b: float, p_f: float,
                 bc_mode: Optional[BcMode] = None, wall: Optional[WallDrive] = None):
        """
        Initialize boundary forcing

        Args:
            grid: Radial grid
            p_a: Mean pressure-gradient coefficient
            p_b: Oscillatory pressure-gradient coefficient
            p_f: Frequency ratio
            bc_mode: Outer concentration regime (default: ramp)
            wall: Outer-wall drive (default: 1 - cos t)
        """
        self.grid = grid
        self.p_a = p_a
        self.p_b = p_b
        self.p_f = p_f
        self.bc_mode = bc_mode or BcMode()
        self.wall = wall or WallDrive()
        self.logger = logging.getLogger(__name__)

    def pressure(self, t_hat: float) -> float:
        return pressure_forcing(t_hat, self.p_a, self.p_b, self.p_f)

    def outer_bc(self, c_profile, t_hat: float) -> OuterConcentrationBc:
        """Outer concentration condition for the state c_profile at t_hat"""
        kind = self.bc_mode.kind
        if kind is BcKind.RAMP:
            return OuterConcentrationBc(value=outer_concentration_ramp(t_hat))
        if kind is BcKind.FIXED:
            return OuterConcentrationBc(value=self.bc_mode.c_tilde)
        return feedback_outer_bc(c_profile, self.grid, self.bc_mode)

    def outer_c_rate(self, t_hat: float) -> float:
        """Time derivative of a Dirichlet outer concentration"""
        if self.bc_mode.kind is BcKind.RAMP:
            return outer_concentration_ramp_rate(t_hat)
        return 0.0

    def record(self, c_profile, t_hat: float) -> ForcingRecord:
        return ForcingRecord(
            wall_velocity=self.wall.velocity(t_hat),
            pressure_forcing=self.pressure(t_hat),
            outer_c=self.outer_bc(c_profile, t_hat),
        )

    def breakpoints(self, t_end: float) -> List[float]:
        """Times the integrator must land on exactly (kinks in the boundary data)"""
        if self.bc_mode.kind is BcKind.RAMP and config.RAMP_END_TIME < t_end:
            return [config.RAMP_END_TIME]
        return []
