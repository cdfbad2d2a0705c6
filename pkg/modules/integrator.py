"""
Adaptive TR-BDF2 time integration with damped Newton and banded LU

One step of size dt:
    trapezoidal stage   z - d*dt*f(z)   = u_n + d*dt*f(u_n)             at t + g*dt
    BDF2 stage          u - d*dt*f(u)   = a*z - b*u_n                    at t + dt
with g = 2 - sqrt(2), d = g/2, a = 1/(g(2-g)), b = (1-g)^2/(g(2-g)). Both stages
share the iteration matrix I - d*dt*J. Rows carrying Dirichlet conditions are
replaced by u_row = value in every stage.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import solve_banded

import config
from modules.errors import AnnuflowError, IntegrationAborted, NewtonDivergence, ParameterError

logger = logging.getLogger(__name__)

GAMMA = 2.0 - math.sqrt(2.0)
D_COEFF = GAMMA / 2.0
A_COEFF = 1.0 / (GAMMA * (2.0 - GAMMA))
B_COEFF = (1.0 - GAMMA) ** 2 / (GAMMA * (2.0 - GAMMA))
ERROR_COEFF = (-3.0 * GAMMA ** 2 + 4.0 * GAMMA - 2.0) / (6.0 * (2.0 - GAMMA))

# ============================================================================
# CONFIGURATION AND REPORTS
# ============================================================================

@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step-control settings"""

    rel_tol: float = config.REL_TOL
    abs_tol: float = config.ABS_TOL
    newton_tol: float = config.NEWTON_TOL
    max_newton: int = config.MAX_NEWTON
    dt_init: float = config.DT_INIT
    dt_max: float = config.DT_MAX
    safety: float = config.SAFETY
    max_rejections: int = config.MAX_REJECTIONS

    def __post_init__(self):
        for name in ('rel_tol', 'abs_tol', 'newton_tol', 'dt_init', 'dt_max', 'safety'):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ParameterError(f"{name} must be a positive number (got {value})")
        if self.max_newton < 1 or self.max_rejections < 1:
            raise ParameterError("max_newton and max_rejections must be >= 1")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@dataclass
class StepReport:
    t_reached: float
    dt_used: float
    newton_iters: int
    error_estimate: float
    accepted: bool


@dataclass
class IntegrationStats:
    accepted_steps: int = 0
    rejected_steps: int = 0
    newton_iterations: int = 0
    newton_failures: int = 0
    jacobians: int = 0
    rhs_evaluations: int = 0
    dt_min: float = math.inf
    dt_max: float = 0.0

    def as_dict(self) -> dict:
        result = dict(self.__dict__)
        if not math.isfinite(result['dt_min']):
            result['dt_min'] = None
        return result


@dataclass
class IntegrationResult:
    """Requested outputs (in request order) and step statistics"""

    outputs: List[Tuple[float, np.ndarray]] = field(default_factory=list)
    stats: IntegrationStats = field(default_factory=IntegrationStats)
    t_reached: float = 0.0

# ============================================================================
# TR-BDF2 INTEGRATOR
# ============================================================================

class TRBDF2Integrator:
    """
    L-stable one-step integrator for a semi-discrete system

    The system must provide rhs(u, t), jacobian(u, t) in solve_banded layout,
    bandwidth = (lower, upper), dirichlet(t, u) -> (rows, values),
    begin_step(u, t) and breakpoints(t_end).
    """

    def __init__(self, system, integrator_config: Optional[IntegratorConfig] = None):
        """
        Initialize the integrator

        Args:
            system: Semi-discrete system to advance
            integrator_config: Tolerances and step control
        """
        self.system = system
        self.config = integrator_config or IntegratorConfig()
        self.stats = IntegrationStats()
        self.logger = logging.getLogger(__name__)

    # ------------------------------------------------------------------
    # Linear algebra
    # ------------------------------------------------------------------

    def _iteration_matrix(self, jac_ab: np.ndarray, coeff: float, rows: np.ndarray) -> np.ndarray:
        """Banded I - coeff*J with Dirichlet rows replaced by identity rows"""
        lower, upper = self.system.bandwidth
        n = jac_ab.shape[1]
        matrix = -coeff * jac_ab
        matrix[upper, :] += 1.0
        for row in rows:
            for col in range(max(0, row - lower), min(n, row + upper + 1)):
                matrix[upper + row - col, col] = 0.0
            matrix[upper, row] = 1.0
        return matrix

    def _solve(self, matrix: np.ndarray, vector: np.ndarray) -> np.ndarray:
        return solve_banded(self.system.bandwidth, matrix, vector, check_finite=False)

    # ------------------------------------------------------------------
    # Stage solve
    # ------------------------------------------------------------------

    def _stage_residual(self, z: np.ndarray, t: float, const: np.ndarray, coeff: float,
                        rows: np.ndarray) -> np.ndarray:
        residual = z - coeff * self.system.rhs(z, t) - const
        residual[rows] = 0.0
        return residual

    def solve_stage(self, guess: np.ndarray, t: float, const: np.ndarray, coeff: float,
                    rows: np.ndarray, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray, int]:
        """
        Solve z - coeff*f(z, t) = const by damped Newton, Dirichlet rows imposed

        Returns:
            (solution, iteration matrix of the last Jacobian, Newton iterations)

        Raises:
            NewtonDivergence: No convergence within max_newton iterations, a
                residual that grows twice in a row, or non-finite values
        """
        cfg = self.config
        z = guess.copy()
        z[rows] = values

        matrix = self._iteration_matrix(self.system.jacobian(z, t), coeff, rows)
        residual = self._stage_residual(z, t, const, coeff, rows)
        norm = float(np.max(np.abs(residual)))
        if norm <= cfg.newton_tol:
            return z, matrix, 0

        growth = 0
        refreshed = True
        for iteration in range(1, cfg.max_newton + 1):
            delta = self._solve(matrix, -residual)
            if not np.all(np.isfinite(delta)):
                raise NewtonDivergence("non-finite Newton update", iteration)

            lam = 1.0
            for _ in range(config.MAX_DAMPING_HALVINGS + 1):
                trial = z + lam * delta
                trial[rows] = values
                try:
                    trial_residual = self._stage_residual(trial, t, const, coeff, rows)
                    trial_norm = float(np.max(np.abs(trial_residual)))
                except AnnuflowError:
                    trial_norm = math.inf
                if trial_norm < norm:
                    break
                lam *= 0.5

            if not math.isfinite(trial_norm):
                raise NewtonDivergence("Newton iterate left the admissible state space", iteration)

            growth = growth + 1 if trial_norm >= norm else 0
            if growth >= 2:
                raise NewtonDivergence("Newton residual grew twice in a row", iteration)

            contraction = trial_norm / norm
            z, residual, norm = trial, trial_residual, trial_norm
            if norm <= cfg.newton_tol:
                return z, matrix, iteration

            # Stale Jacobian: refresh once the iteration stops contracting
            if contraction > 0.5 and not refreshed:
                matrix = self._iteration_matrix(self.system.jacobian(z, t), coeff, rows)
                refreshed = True
            else:
                refreshed = False

        raise NewtonDivergence(f"no convergence in {cfg.max_newton} Newton iterations "
                               f"(residual {norm:.3e})", cfg.max_newton)

    # ------------------------------------------------------------------
    # One step
    # ------------------------------------------------------------------

    def _weights(self, u_old: np.ndarray, u_new: np.ndarray) -> np.ndarray:
        return self.config.abs_tol + self.config.rel_tol * np.maximum(np.abs(u_old), np.abs(u_new))

    def step(self, u: np.ndarray, t: float, dt: float) -> Tuple[np.ndarray, StepReport]:
        """
        Advance one TR-BDF2 step

        Args:
            u: Accepted state at t
            t: Current time
            dt: Step size (> 0)

        Returns:
            (new state, StepReport); accepted is True when the weighted RMS
            error estimate is <= 1

        Raises:
            NewtonDivergence: Either stage failed to converge
        """
        if not dt > 0:
            raise ParameterError(f"dt must be > 0 (got {dt})")

        system = self.system
        system.begin_step(u, t)
        h = dt
        coeff = D_COEFF * h

        f_n = system.rhs(u, t)

        t_gamma = t + GAMMA * h
        rows, values = system.dirichlet(t_gamma, u)
        const1 = u + coeff * f_n
        z, _, iters1 = self.solve_stage(u, t_gamma, const1, coeff, rows, values)

        t_new = t + h
        rows, values = system.dirichlet(t_new, u)
        const2 = A_COEFF * z - B_COEFF * u
        guess = u + (z - u) / GAMMA
        u_new, matrix, iters2 = self.solve_stage(guess, t_new, const2, coeff, rows, values)

        # Stage derivatives recovered from the stage equations
        f_gamma = (z - const1) / coeff
        f_new = (u_new - const2) / coeff
        estimate = ERROR_COEFF * h * (f_n / GAMMA - f_gamma / (GAMMA * (1.0 - GAMMA))
                                      + f_new / (1.0 - GAMMA))
        estimate[rows] = 0.0
        estimate = self._solve(matrix, estimate)
        estimate[rows] = 0.0

        free = np.ones(u.size, dtype=bool)
        free[rows] = False
        scaled = estimate[free] / self._weights(u, u_new)[free]
        error = float(np.sqrt(np.mean(scaled ** 2))) if scaled.size else 0.0

        report = StepReport(t_reached=t_new, dt_used=h, newton_iters=iters1 + iters2,
                            error_estimate=error, accepted=error <= 1.0)
        return u_new, report

    # ------------------------------------------------------------------
    # Adaptive driver
    # ------------------------------------------------------------------

    def _next_dt(self, dt: float, error: float) -> float:
        cfg = self.config
        if error == 0.0:
            factor = config.DT_GROWTH_MAX
        else:
            factor = cfg.safety * error ** (-1.0 / 3.0)
        factor = min(config.DT_GROWTH_MAX, max(config.DT_SHRINK_MIN, factor))
        return min(cfg.dt_max, dt * factor)

    def integrate(self, u0: np.ndarray, t0: float, t_end: float,
                  output_times: Sequence[float] = (),
                  observer: Optional[Callable[[float, np.ndarray], None]] = None) -> IntegrationResult:
        """
        Integrate adaptively from t0 to t_end, landing exactly on every output
        time and on every breakpoint of the system

        Args:
            u0: Initial state
            t0: Initial time
            t_end: Final time
            output_times: Sorted times in [t0, t_end] at which to keep the state
            observer: Called with (t, u) after every accepted step

        Returns:
            IntegrationResult

        Raises:
            IntegrationAborted: max_rejections consecutive rejections, or the
                step size collapsed; carries the partial result
        """
        cfg = self.config
        times = [float(t) for t in output_times]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ParameterError("output times must be sorted")
        if times and (times[0] < t0 or times[-1] > t_end):
            raise ParameterError(f"output times must lie in [{t0}, {t_end}]")
        if t_end < t0:
            raise ParameterError("t_end must be >= t0")

        result = IntegrationResult(stats=self.stats, t_reached=t0)
        u = np.array(u0, dtype=float)
        t = float(t0)

        pending = list(times)
        while pending and pending[0] <= t:
            result.outputs.append((pending.pop(0), u.copy()))

        targets = sorted(set(pending) | {b for b in self.system.breakpoints(t_end) if t0 < b < t_end}
                         | ({t_end} if t_end > t0 else set()))

        self.logger.debug(f"Integrating from t_hat={t0:.6g} to {t_end:.6g} "
                          f"({len(targets)} landing points)")

        dt = min(cfg.dt_init, cfg.dt_max)
        rejections = 0
        for target in targets:
            while t < target:
                remaining = target - t
                # absorb a short remainder into this step, never beyond dt_max
                landing = remaining <= min(1.1 * dt, cfg.dt_max) * (1.0 + 1e-12)
                dt_try = remaining if landing else dt

                try:
                    u_new, report = self.step(u, t, dt_try)
                    self.stats.newton_iterations += report.newton_iters
                except NewtonDivergence as e:
                    self.stats.newton_failures += 1
                    report = None
                    self.logger.debug(f"Newton failure at t_hat={t:.6g}, dt={dt_try:.3e}: {e}")

                if report is not None and report.accepted:
                    t = target if landing else t + dt_try
                    u = u_new
                    rejections = 0
                    self.stats.accepted_steps += 1
                    self.stats.dt_min = min(self.stats.dt_min, dt_try)
                    self.stats.dt_max = max(self.stats.dt_max, dt_try)
                    result.t_reached = t
                    if observer is not None:
                        observer(t, u)
                    dt = self._next_dt(dt_try, report.error_estimate)
                    continue

                rejections += 1
                self.stats.rejected_steps += 1
                if report is None:
                    dt = 0.5 * dt_try
                else:
                    dt = self._next_dt(dt_try, report.error_estimate)
                    dt = min(dt, 0.9 * dt_try)
                    self.logger.debug(f"Rejected step at t_hat={t:.6g}: dt={dt_try:.3e}, "
                                      f"error={report.error_estimate:.3e}")

                if rejections >= cfg.max_rejections or dt <= 1e-14 * max(1.0, abs(t)):
                    self._sync_counters()
                    raise IntegrationAborted(f"{rejections} consecutive step rejections",
                                             last_good_t=t, partial=result)

            while pending and pending[0] <= t:
                result.outputs.append((pending.pop(0), u.copy()))

        self._sync_counters()
        self.logger.debug(f"Integration finished: {self.stats.accepted_steps} steps, "
                          f"{self.stats.rejected_steps} rejected")
        return result

    def integrate_fixed(self, u0: np.ndarray, t0: float, t_end: float, dt: float) -> np.ndarray:
        """
        Fixed-step TR-BDF2 without error control (the last step is shortened
        to land on t_end)

        Raises:
            NewtonDivergence: A stage failed to converge
        """
        u = np.array(u0, dtype=float)
        t = float(t0)
        n_steps = max(1, int(round((t_end - t0) / dt)))
        for k in range(n_steps):
            t_next = t0 + (k + 1) * (t_end - t0) / n_steps
            u, report = self.step(u, t, t_next - t)
            self.stats.accepted_steps += 1
            self.stats.newton_iterations += report.newton_iters
            t = t_next
        self._sync_counters()
        return u

    def _sync_counters(self):
        self.stats.jacobians = getattr(self.system, 'n_jacobians', 0)
        self.stats.rhs_evaluations = getattr(self.system, 'n_rhs_evaluations', 0)

# ============================================================================
# CONVENIENCE FUNCTIONS
# ============================================================================

def step(system, u: np.ndarray, t: float, dt: float,
         integrator_config: Optional[IntegratorConfig] = None) -> Tuple[np.ndarray, StepReport]:
    """One TR-BDF2 step of a semi-discrete system"""
    return TRBDF2Integrator(system, integrator_config).step(u, t, dt)


def integrate(system, u0: np.ndarray, t_end: float, output_times: Sequence[float],
              integrator_config: Optional[IntegratorConfig] = None, t0: float = 0.0,
              observer: Optional[Callable[[float, np.ndarray], None]] = None) -> IntegrationResult:
    """Adaptive integration from t0 to t_end with exact landings on output_times"""
    return TRBDF2Integrator(system, integrator_config).integrate(u0, t0, t_end, output_times, observer)
