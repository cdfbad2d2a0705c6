"""
Study orchestration: configuration -> constitutive model -> grid -> integrator
-> snapshots, with cycle bookkeeping and the non-dimensional parameter group
"""

import os
import math
import time
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

import config
from modules.constitutive import ConstitutiveModel, ModelKind, builtin_model, validate
from modules.errors import IntegrationAborted, ParameterError
from modules.forcing import BcMode, WallDrive
from modules.grid import build_grid
from modules.integrator import IntegratorConfig, TRBDF2Integrator
from modules.pressure import reconstruct
from modules.residual import N_FIELDS, NondimParams, SemiDiscreteSystem, StateVector

logger = logging.getLogger(__name__)

# ============================================================================
# INPUT RECORDS
# ============================================================================

@dataclass(frozen=True)
class PhysicalInputs:
    """Dimensional inputs: geometry, drive, forcing, fluid and diffusivity"""

    r_i: float
    r_o: float
    omega_bar: float
    f_theta: float
    f_z: float
    a: float
    b: float
    rho_f: float
    mu0_bar: float
    d_c: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class NondimInputs:
    """
    Direct non-dimensional inputs

    p_beta defaults to the model's beta and p_gamma to 2 gamma (1 + p_g)^2 omega_bar^2,
    the physical definition rewritten with r_o / (r_o - r_i) = 1 + p_g.
    """

    re: float
    pe: float
    p_f: float
    p_g: float
    p_a: float = 0.0
    p_b: float = 0.0
    p_beta: Optional[float] = None
    p_gamma: Optional[float] = None
    omega_bar: float = 1.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class StudyConfig:
    """Everything one run needs; exactly one input group must be given"""

    model: ConstitutiveModel
    physical: Optional[PhysicalInputs] = None
    nondim: Optional[NondimInputs] = None
    n_nodes: int = config.DEFAULT_N_NODES
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    bc_mode: BcMode = field(default_factory=BcMode)
    wall: WallDrive = field(default_factory=WallDrive)
    cycles: tuple = config.REFERENCE_CYCLES
    name: str = "study"

    def __post_init__(self):
        if (self.physical is None) == (self.nondim is None):
            raise ParameterError("exactly one input group (physical or non-dimensional) is required")
        if any(not math.isfinite(c) or c < 0 for c in self.cycles):
            raise ParameterError(f"cycles must be finite and >= 0 (got {self.cycles})")
        if not self.cycles:
            raise ParameterError("at least one snapshot cycle is required")

    @property
    def params(self) -> NondimParams:
        return resolve_params(self)

    def as_dict(self) -> dict:
        return {
            'name': self.name,
            'model': self.model.as_dict(),
            'physical': self.physical.as_dict() if self.physical else None,
            'nondim': self.nondim.as_dict() if self.nondim else None,
            'n_nodes': self.n_nodes,
            'integrator': self.integrator.as_dict(),
            'bc': {
                'mode': self.bc_mode.kind.value,
                'c_tilde': self.bc_mode.c_tilde,
                'c_bar': self.bc_mode.c_bar,
                'r_bar_hat': self.bc_mode.r_bar_hat,
                'wall': self.wall.kind.value,
                'wall_value': self.wall.value,
            },
            'cycles': list(self.cycles),
        }

# ============================================================================
# OUTPUT RECORDS
# ============================================================================

@dataclass
class Snapshot:
    """Profiles at one snapshot time"""

    t_hat: float
    cycle_count: float
    r: np.ndarray
    v: np.ndarray
    w: np.ndarray
    c: np.ndarray
    mu: np.ndarray
    h: np.ndarray
    axial_coeff: float = 0.0
    stress_power: Optional[np.ndarray] = None

    @property
    def max_stress_power(self) -> float:
        return float(np.max(self.stress_power)) if self.stress_power is not None else 0.0


@dataclass
class CenterlineHistory:
    """Field values at r_hat = CENTERLINE_R_HAT after every accepted step"""

    t_hat: List[float] = field(default_factory=list)
    cycle: List[float] = field(default_factory=list)
    v: List[float] = field(default_factory=list)
    w: List[float] = field(default_factory=list)
    c: List[float] = field(default_factory=list)
    mu: List[float] = field(default_factory=list)

    def append(self, t_hat: float, v: float, w: float, c: float, mu: float):
        self.t_hat.append(t_hat)
        self.cycle.append(t_hat / config.CYCLE_LENGTH)
        self.v.append(v)
        self.w.append(w)
        self.c.append(c)
        self.mu.append(mu)

    def __len__(self) -> int:
        return len(self.t_hat)


@dataclass
class StudyResult:
    config: StudyConfig
    params: NondimParams
    snapshots: List[Snapshot] = field(default_factory=list)
    history: CenterlineHistory = field(default_factory=CenterlineHistory)
    stats: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    aborted: bool = False
    abort_message: str = ""
    last_good_t: Optional[float] = None

    def metadata(self) -> dict:
        return {
            'solver_version': config.SOLVER_VERSION,
            'config': self.config.as_dict(),
            'params': self.params.as_dict(),
            'stats': self.stats,
            'wall_clock_s': self.wall_clock,
            'aborted': self.aborted,
            'abort_message': self.abort_message,
            'last_good_t_hat': self.last_good_t,
            'max_stress_power': max((s.max_stress_power for s in self.snapshots), default=0.0),
        }

# ============================================================================
# NON-DIMENSIONAL PARAMETERS
# ============================================================================

def derive_nondim(physical: PhysicalInputs, model: ConstitutiveModel) -> NondimParams:
    """
    Non-dimensional parameter group from physical inputs

    Args:
        physical: Dimensional inputs
        model: Constitutive model (supplies beta and gamma)

    Returns:
        NondimParams

    Raises:
        ParameterError: r_o <= r_i, r_i <= 0, or a zero scale that would divide
    """
    p = physical
    if not p.r_i > 0:
        raise ParameterError(f"r_i must be > 0 (got {p.r_i})")
    if not p.r_o > p.r_i:
        raise ParameterError(f"r_o must exceed r_i (got r_i={p.r_i}, r_o={p.r_o})")
    for name in ('omega_bar', 'f_theta', 'rho_f', 'mu0_bar', 'd_c'):
        if not getattr(p, name) > 0:
            raise ParameterError(f"{name} must be > 0 (got {getattr(p, name)})")

    gap = p.r_o - p.r_i
    pressure_scale = p.rho_f * p.r_o * p.omega_bar * p.f_theta
    return NondimParams(
        re=p.rho_f * p.f_theta * gap ** 2 / p.mu0_bar,
        pe=p.f_theta * gap ** 2 / p.d_c,
        p_f=p.f_z / p.f_theta,
        p_g=p.r_i / gap,
        p_gamma=2.0 * model.gamma * p.r_o ** 2 * p.omega_bar ** 2 / gap ** 2,
        p_beta=model.beta,
        p_a=p.a / pressure_scale,
        p_b=p.b / pressure_scale,
    )


def resolve_params(study: StudyConfig) -> NondimParams:
    """NondimParams of a study from whichever input group it carries"""
    if study.physical is not None:
        return derive_nondim(study.physical, study.model)

    n = study.nondim
    p_beta = study.model.beta if n.p_beta is None else n.p_beta
    p_gamma = n.p_gamma
    if p_gamma is None:
        p_gamma = 2.0 * study.model.gamma * (1.0 + n.p_g) ** 2 * n.omega_bar ** 2
    return NondimParams(re=n.re, pe=n.pe, p_f=n.p_f, p_g=n.p_g, p_gamma=p_gamma,
                        p_beta=p_beta, p_a=n.p_a, p_b=n.p_b)

# ============================================================================
# STUDY RUNNER
# ============================================================================

class StudyRunner:
    """Runs one study: initial data, integration, snapshots and centerline history"""

    def __init__(self, study: StudyConfig):
        """
        Initialize the runner

        Args:
            study: Validated study configuration

        Raises:
            ParameterError: Invalid parameters or a model record with violations
        """
        self.study = study
        self.logger = logging.getLogger(__name__)

        report = validate(study.model)
        if not report.ok:
            raise ParameterError(f"invalid {study.model.kind.value} parameters: "
                                 f"{', '.join(report.violations)}")

        self.params = resolve_params(study)
        if not self.params.forcing_vanishes_at_rest:
            self.logger.warning(f"p_A ({self.params.p_a:g}) != -p_B ({self.params.p_b:g}): "
                                "initial rest state is inconsistent with the axial forcing")

        self.grid = build_grid(study.n_nodes, self.params.p_g)
        self.system = SemiDiscreteSystem(self.grid, study.model, self.params, study.bc_mode, study.wall)
        self.history = CenterlineHistory()

    def initial_state(self) -> np.ndarray:
        """Rest state with uniform concentration, boundary values imposed at t = 0"""
        u0 = StateVector.rest(self.grid.n_nodes, config.INITIAL_CONCENTRATION).to_vector()
        self.system.begin_step(u0, 0.0)
        rows, values = self.system.dirichlet(0.0, u0)
        u0[rows] = values
        return u0

    def snapshot(self, u: np.ndarray, t_hat: float) -> Snapshot:
        """Snapshot record of state u at t_hat"""
        state = StateVector.from_vector(u, t_hat)
        pressure = reconstruct(state.v, self.grid, self.params, t_hat)
        return Snapshot(
            t_hat=t_hat,
            cycle_count=t_hat / config.CYCLE_LENGTH,
            r=self.grid.nodes,
            v=state.v,
            w=state.w,
            c=state.c,
            mu=self.system.nodal_viscosity(state.v, state.w, state.c),
            h=pressure.h_profile,
            axial_coeff=pressure.axial_coeff,
            stress_power=self.system.nodal_stress_power(state.v, state.w, state.c),
        )

    def _observe(self, t_hat: float, u: np.ndarray):
        fields = u.reshape(-1, N_FIELDS)
        v, w, c = fields[:, 0], fields[:, 1], fields[:, 2]
        r, r0 = self.grid.nodes, config.CENTERLINE_R_HAT
        mu = self.system.nodal_viscosity(v, w, c)
        self.history.append(t_hat, float(np.interp(r0, r, v)), float(np.interp(r0, r, w)),
                            float(np.interp(r0, r, c)), float(np.interp(r0, r, mu)))

    def run(self) -> StudyResult:
        """
        Integrate to the last requested cycle and collect snapshots

        Returns:
            StudyResult with snapshots in cycle order

        Raises:
            IntegrationAborted: partial carries a StudyResult flagged aborted
        """
        study = self.study
        cycles = sorted(study.cycles)
        times = [config.CYCLE_LENGTH * c for c in cycles]
        t_end = times[-1]

        self.logger.info(f"Running '{study.name}': {study.model.kind.value}, N={self.grid.n_nodes}, "
                         f"Re={self.params.re:g}, Pe={self.params.pe:g}, cycles={cycles}")

        result = StudyResult(config=study, params=self.params, history=self.history)
        integrator = TRBDF2Integrator(self.system, study.integrator)
        u0 = self.initial_state()
        self._observe(0.0, u0)

        start = time.perf_counter()
        try:
            outcome = integrator.integrate(u0, 0.0, t_end, times, observer=self._observe)
        except IntegrationAborted as e:
            outcome = e.partial
            result.aborted = True
            result.abort_message = e.message
            result.last_good_t = e.last_good_t
            self.logger.error(f"Integration aborted for '{study.name}': {e}")
        result.wall_clock = time.perf_counter() - start
        result.stats = outcome.stats.as_dict()

        result.snapshots = [self.snapshot(u, t) for t, u in outcome.outputs]

        if result.aborted:
            raise IntegrationAborted(result.abort_message, last_good_t=result.last_good_t, partial=result)

        self.logger.info(f"Finished '{study.name}' in {result.wall_clock:.2f}s "
                         f"({result.stats['accepted_steps']} steps, "
                         f"{result.stats['rejected_steps']} rejected)")
        return result


def run(study: StudyConfig) -> StudyResult:
    """Run one study"""
    return StudyRunner(study).run()

# ============================================================================
# HISTORY ANALYSIS
# ============================================================================

def centerline_amplitude(history: CenterlineHistory, field_name: str, cycle: float) -> float:
    """
    Largest |field| at the centerline over the cycle ending at `cycle`

    Args:
        history: Centerline history of a run
        field_name: 'v', 'w', 'c' or 'mu'
        cycle: End of the one-cycle window, in cycles

    Raises:
        ParameterError: Unknown field or an empty window
    """
    if field_name not in ('v', 'w', 'c', 'mu'):
        raise ParameterError(f"unknown centerline field '{field_name}'")

    cycles = np.asarray(history.cycle)
    values = np.asarray(getattr(history, field_name))
    window = (cycles > cycle - 1.0 - 1e-12) & (cycles <= cycle + 1e-12)
    if not np.any(window):
        raise ParameterError(f"no centerline samples in the cycle ending at {cycle}")
    return float(np.max(np.abs(values[window])))

# ============================================================================
# MODEL SWEEPS
# ============================================================================

def max_workers_from_env(default: Optional[int] = None) -> int:
    """Worker cap from the ANNUFLOW_THREADS environment variable"""
    raw = os.environ.get(config.THREADS_ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning(f"Ignoring non-integer {config.THREADS_ENV_VAR}={raw!r}")
    return default or os.cpu_count() or 1


def for_model(study: StudyConfig, kind: ModelKind) -> StudyConfig:
    """
    Copy of a study with the reference parameters of another model

    Explicit p_beta / p_gamma belong to the source model, so they are dropped
    and re-derived from the new model's beta and gamma.
    """
    nondim = study.nondim
    if nondim is not None:
        nondim = replace(nondim, p_beta=None, p_gamma=None)
    return replace(study, model=builtin_model(kind), nondim=nondim, name=f"{study.name}_{kind.value}")


def run_models(study: StudyConfig, kinds: Iterable[ModelKind] = tuple(ModelKind),
               max_workers: Optional[int] = None) -> Dict[ModelKind, StudyResult]:
    """
    Run one study per model kind, in parallel when more than one worker is allowed

    Returns:
        Results keyed by model kind, in the order of `kinds`
    """
    kinds = list(kinds)
    studies = [for_model(study, kind) for kind in kinds]
    workers = min(len(studies), max_workers or max_workers_from_env())

    if workers <= 1:
        return {kind: run(s) for kind, s in zip(kinds, studies)}

    logger.info(f"Running {len(studies)} studies on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, studies))
    return dict(zip(kinds, results))


def run_many(studies: Sequence[StudyConfig], max_workers: Optional[int] = None) -> List[StudyResult]:
    """Run independent studies, in parallel when allowed; order is preserved"""
    workers = min(len(studies), max_workers or max_workers_from_env())
    if workers <= 1:
        return [run(s) for s in studies]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, studies))
