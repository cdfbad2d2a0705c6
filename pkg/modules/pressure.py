"""
Pressure reconstruction from an azimuthal velocity snapshot

pi_hat(r, z, t) = -[p_A + p_B cos(p_f t)] z + h_hat(r, t),
h_hat(r, t) = integral from 0 to r of v_hat^2 / (s + p_g) ds

The free function of time is fixed to zero: pressure is reported relative to
the inner wall at z = 0.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from modules.errors import ParameterError
from modules.forcing import pressure_forcing
from modules.grid import RadialGrid
from modules.residual import NondimParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PressureSnapshot:
    """Radial pressure profile and the axial coefficient at one instant"""

    r_hat: np.ndarray
    h_profile: np.ndarray
    axial_coeff: float
    t_hat: float = 0.0


def reconstruct(v_profile, grid: RadialGrid, params: NondimParams, t_hat: float) -> PressureSnapshot:
    """
    Rebuild the pressure field of a velocity snapshot

    Args:
        v_profile: Azimuthal velocity at the nodes
        grid: Radial grid
        params: Dimensionless parameters (p_A, p_B, p_f)
        t_hat: Snapshot time

    Returns:
        PressureSnapshot with h_profile[0] = 0
    """
    v = grid.check_profile(v_profile, "v_profile")
    integrand = v ** 2 / grid.rho
    h_profile = cumulative_trapezoid(integrand, grid.nodes, initial=0.0)
    axial_coeff = -pressure_forcing(t_hat, params.p_a, params.p_b, params.p_f)
    return PressureSnapshot(r_hat=grid.nodes, h_profile=h_profile, axial_coeff=axial_coeff, t_hat=t_hat)


def pressure_at(snapshot: PressureSnapshot, r_hat: float, z_hat: float) -> float:
    """
    Pressure at (r_hat, z_hat): axial term plus linear interpolation of h_hat

    Raises:
        ParameterError: r_hat outside [0, 1]
    """
    if not 0.0 <= r_hat <= 1.0:
        raise ParameterError(f"r_hat must lie in [0, 1] (got {r_hat})")
    radial = float(np.interp(r_hat, snapshot.r_hat, snapshot.h_profile))
    return snapshot.axial_coeff * z_hat + radial
