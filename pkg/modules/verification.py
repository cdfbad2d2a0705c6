"""
Acceptance suite behind `annuflow.py verify`

Each check compares the solver against an oracle (exact steady profiles, the
dense matrix exponential) or against a qualitative property of the reference
study. `fast` mode keeps to grids of at most 101 nodes and short runs.
"""

import os
import math
import filecmp
import logging
import tempfile
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

import config
from modules.constitutive import ModelKind, builtin_model
from modules.forcing import BcKind, BcMode, WallDrive, WallKind
from modules.grid import build_grid, div_theta, div_z
from modules.integrator import IntegratorConfig, TRBDF2Integrator
from modules.oracle import (
    LinearODESystem, couette, dense_propagator, diffusion_matrix, poiseuille_annulus,
)
from modules.report_generator import write_snapshot_csv
from modules.simulation import (
    NondimInputs, StudyConfig, StudyResult, centerline_amplitude, run, run_many, run_models,
)
from modules.utils import print_error, print_info, print_success, print_warning

logger = logging.getLogger(__name__)

# Steady-state verification settings
STEADY_T_END = 200.0
STEADY_DT_MAX = 1.0
COUETTE_WALL = 2.0
POISEUILLE_FORCING = 1.0
STEADY_TOL = 1e-6

ORDER_RANGE = (3.5, 4.5)
TEMPORAL_DTS = (0.1, 0.05, 0.025)
TEMPORAL_N_NODES = 21
TEMPORAL_PE = 100.0

BOUND_SLACK = 1e-9
MONOTONE_SLACK = 1e-12
MODEL_C_TOL = 1e-4
W_NULL_TOL = 1e-12
SELF_CONVERGENCE_TOL = 1e-4

FAST_N_NODES = 51
FAST_CYCLES = (3.5,)

NON_NEWTONIAN = (ModelKind.MODEL1, ModelKind.MODEL2A, ModelKind.MODEL2B)

# ============================================================================
# RESULTS
# ============================================================================

@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool = False
    detail: str = ""
    skipped: bool = False

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class VerificationReport:
    fast: bool
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results if not r.skipped)

    def as_dict(self) -> dict:
        return {'fast': self.fast, 'passed': self.passed,
                'checks': [r.as_dict() for r in self.results]}


def _ratios(errors: Sequence[float]) -> List[float]:
    return [a / b if b > 0 else math.inf for a, b in zip(errors, errors[1:])]


def _in_order_range(ratios: Sequence[float]) -> bool:
    low, high = ORDER_RANGE
    return all(low <= r <= high for r in ratios)

# ============================================================================
# ORACLE COMPUTATIONS
# ============================================================================

def steady_study(kind: str, n_nodes: int) -> StudyConfig:
    """Newtonian study driven to a steady Couette ('couette') or Poiseuille ('poiseuille') state"""
    if kind == 'couette':
        wall = WallDrive(WallKind.CONSTANT, COUETTE_WALL)
        p_a = 0.0
    elif kind == 'poiseuille':
        wall = WallDrive(WallKind.NONE)
        p_a = POISEUILLE_FORCING
    else:
        raise ValueError(f"unknown steady study '{kind}'")

    return StudyConfig(
        model=builtin_model(ModelKind.NEWTONIAN),
        nondim=NondimInputs(re=config.REFERENCE_RE, pe=config.REFERENCE_PE, p_f=config.REFERENCE_P_F,
                            p_g=config.REFERENCE_P_G, p_a=p_a, p_b=0.0),
        n_nodes=n_nodes,
        integrator=IntegratorConfig(dt_max=STEADY_DT_MAX),
        bc_mode=BcMode(kind=BcKind.FIXED, c_tilde=config.INITIAL_CONCENTRATION),
        wall=wall,
        cycles=(STEADY_T_END / config.CYCLE_LENGTH,),
        name=f"steady_{kind}_{n_nodes}",
    )


def steady_error(kind: str, n_nodes: int) -> float:
    """Max-norm distance between the integrated steady state and its oracle"""
    result = run(steady_study(kind, n_nodes))
    snap = result.snapshots[-1]
    p_g = result.params.p_g
    if kind == 'couette':
        return float(np.max(np.abs(snap.v - couette(COUETTE_WALL, p_g).velocity(snap.r))))
    exact = poiseuille_annulus(POISEUILLE_FORCING, p_g, re=result.params.re).velocity(snap.r)
    return float(np.max(np.abs(snap.w - exact)))


def temporal_errors(dts: Sequence[float] = TEMPORAL_DTS, n_nodes: int = TEMPORAL_N_NODES,
                    pe: float = TEMPORAL_PE, t_end: float = 1.0) -> List[float]:
    """Fixed-step TR-BDF2 errors at t_end on concentration diffusion, against exp(tA)"""
    grid = build_grid(n_nodes, config.REFERENCE_P_G)
    matrix = diffusion_matrix(grid, pe)
    c0 = 0.1 + 0.2 * grid.nodes ** 2
    exact = dense_propagator(matrix, t_end) @ c0

    errors = []
    for dt in dts:
        approx = TRBDF2Integrator(LinearODESystem(matrix)).integrate_fixed(c0, 0.0, t_end, dt)
        errors.append(float(np.max(np.abs(approx - exact))))
    return errors


def operator_residuals(n_nodes: int) -> Dict[str, float]:
    """Discrete operators applied to sampled Newtonian steady profiles"""
    grid = build_grid(n_nodes, config.REFERENCE_P_G)
    ones = np.ones(grid.n_nodes)
    v = couette(COUETTE_WALL, grid.p_g).sample(grid)
    solution = poiseuille_annulus(POISEUILLE_FORCING, grid.p_g, re=config.REFERENCE_RE)
    w = solution.sample(grid)
    return {
        'couette': float(np.max(np.abs(div_theta(grid, ones, v)))),
        'poiseuille': float(np.max(np.abs(div_z(grid, ones, w) / config.REFERENCE_RE + POISEUILLE_FORCING))),
    }


def refinement_gaps(coarse: Sequence, fine: Sequence) -> Dict[float, float]:
    """
    Max-norm v difference between matching snapshots of an N and a 2N-1 node run

    Raises:
        ValueError: Snapshot cycles differ or the grids are not nested
    """
    gaps = {}
    for lo, hi in zip(coarse, fine):
        if lo.cycle_count != hi.cycle_count or (len(lo.v) - 1) * 2 != len(hi.v) - 1:
            raise ValueError(f"snapshots at cycle {lo.cycle_count:g} and {hi.cycle_count:g} are not comparable")
        gaps[lo.cycle_count] = float(np.max(np.abs(np.asarray(lo.v) - np.asarray(hi.v)[::2])))
    if len(coarse) != len(fine):
        raise ValueError(f"{len(coarse)} coarse snapshots against {len(fine)} fine ones")
    return gaps

# ============================================================================
# ACCEPTANCE SUITE
# ============================================================================

class AcceptanceSuite:
    """Runs the acceptance checks, sharing expensive study runs between them"""

    def __init__(self, fast: bool = False, max_workers: Optional[int] = None):
        """
        Initialize the suite

        Args:
            fast: Restrict to grids of at most 101 nodes and short runs
            max_workers: Parallel study runs (default: ANNUFLOW_THREADS or CPU count)
        """
        self.fast = fast
        self.max_workers = max_workers
        self.logger = logging.getLogger(__name__)
        self._steady: Dict[tuple, float] = {}
        self._reference: Dict[tuple, Dict[ModelKind, StudyResult]] = {}

        self.checks: List[tuple] = [
            ('operators', "Operators vanish on sampled steady profiles (O(h^2))", self.check_operators, True),
            ('couette', "Steady Couette oracle, N=401", self.check_couette, False),
            ('poiseuille', "Annular Poiseuille oracle, N=401", self.check_poiseuille, False),
            ('spatial_order', "Spatial order 2 on both steady oracles", self.check_spatial_order, True),
            ('temporal_order', "Temporal order 2 against the matrix exponential", self.check_temporal_order, True),
            ('w_nullity', "Newtonian axial velocity stays zero", self.check_w_nullity, True),
            ('concentration', "Concentration bounds, wall value, monotonicity, model independence",
             self.check_concentration, True),
            ('viscosity_growth', "Centerline viscosity grows across cycles", self.check_viscosity_growth, False),
            ('concavity', "Velocity concavity signature", self.check_concavity, False),
            ('axial_suppression', "Centerline axial amplitude decays with thickening",
             self.check_axial_suppression, False),
            ('model_proximity', "Model 2a is closer to 2b than to 1", self.check_model_proximity, False),
            ('rest_determinism', "Rest preservation and bit-identical reruns", self.check_rest_determinism, True),
            ('self_convergence', "N=201 vs N=401 snapshot agreement", self.check_self_convergence, False),
        ]

    # ------------------------------------------------------------------
    # Shared runs
    # ------------------------------------------------------------------

    def _steady_error(self, kind: str, n_nodes: int) -> float:
        key = (kind, n_nodes)
        if key not in self._steady:
            self._steady[key] = steady_error(kind, n_nodes)
            self.logger.debug(f"{kind} steady error at N={n_nodes}: {self._steady[key]:.3e}")
        return self._steady[key]

    def reference_study(self, p_a: float = 0.0, p_b: float = 0.0, n_nodes: Optional[int] = None,
                    cycles: Optional[tuple] = None) -> StudyConfig:
        """Reference-study settings (r_i = 1, r_o = 1.2, Re = 10, Pe = 1000)"""
        if n_nodes is None:
            n_nodes = FAST_N_NODES if self.fast else config.DEFAULT_N_NODES
        if cycles is None:
            cycles = FAST_CYCLES if self.fast else config.REFERENCE_CYCLES
        return StudyConfig(
            model=builtin_model(ModelKind.NEWTONIAN),
            nondim=NondimInputs(re=config.REFERENCE_RE, pe=config.REFERENCE_PE, p_f=config.REFERENCE_P_F,
                                p_g=config.REFERENCE_P_G, p_a=p_a, p_b=p_b,
                                omega_bar=config.REFERENCE_OMEGA_BAR),
            n_nodes=n_nodes,
            cycles=cycles,
            name=f"reference_pa{p_a:g}_pb{p_b:g}_n{n_nodes}",
        )

    def reference_runs(self, gradient: bool = False) -> Dict[ModelKind, StudyResult]:
        """All four models at the reference settings, with or without the axial gradient"""
        key = ('gradient' if gradient else 'plain',)
        if key not in self._reference:
            study = self.reference_study(1.0, -1.0) if gradient else self.reference_study()
            self._reference[key] = run_models(study, tuple(ModelKind), self.max_workers)
        return self._reference[key]

    # ------------------------------------------------------------------
    # Checks
    # ------------------------------------------------------------------

    def check_operators(self) -> CheckResult:
        result = CheckResult('operators', "")
        coarse, fine = operator_residuals(51), operator_residuals(101)
        details, ok = [], True
        for name in ('couette', 'poiseuille'):
            ratio = coarse[name] / fine[name] if fine[name] > 0 else math.inf
            # An exact-to-round-off residual is fine too
            good = fine[name] < 1e-10 or ORDER_RANGE[0] <= ratio <= ORDER_RANGE[1]
            ok &= good
            details.append(f"{name}: {fine[name]:.2e} (ratio {ratio:.2f})")
        result.passed = ok
        result.detail = "; ".join(details)
        return result

    def _steady_check(self, key: str, kind: str) -> CheckResult:
        error = self._steady_error(kind, 401)
        return CheckResult(key, "", passed=error <= STEADY_TOL, detail=f"max error {error:.3e}")

    def check_couette(self) -> CheckResult:
        return self._steady_check('couette', 'couette')

    def check_poiseuille(self) -> CheckResult:
        return self._steady_check('poiseuille', 'poiseuille')

    def check_spatial_order(self) -> CheckResult:
        sizes = (51, 101) if self.fast else (51, 101, 201)
        details, ok = [], True
        for kind in ('couette', 'poiseuille'):
            errors = [self._steady_error(kind, n) for n in sizes]
            ratios = _ratios(errors)
            ok &= _in_order_range(ratios)
            details.append(f"{kind} ratios " + ", ".join(f"{r:.2f}" for r in ratios))
        return CheckResult('spatial_order', "", passed=ok, detail="; ".join(details))

    def check_temporal_order(self) -> CheckResult:
        errors = temporal_errors()
        ratios = _ratios(errors)
        return CheckResult('temporal_order', "", passed=_in_order_range(ratios),
                           detail="ratios " + ", ".join(f"{r:.2f}" for r in ratios))

    def check_w_nullity(self) -> CheckResult:
        newtonian = self.reference_runs()[ModelKind.NEWTONIAN]
        worst = max(float(np.max(np.abs(s.w))) for s in newtonian.snapshots)
        return CheckResult('w_nullity', "", passed=worst <= W_NULL_TOL, detail=f"max |w_hat| {worst:.2e}")

    def check_concentration(self) -> CheckResult:
        runs = self.reference_runs()
        low, high = config.RAMP_START - BOUND_SLACK, config.RAMP_PLATEAU + BOUND_SLACK
        problems = []

        for kind, result in runs.items():
            history = np.asarray(result.history.c)
            if history.size and (history.min() < low or history.max() > high):
                problems.append(f"{kind.value}: centerline c out of bounds")
            for snap in result.snapshots:
                if snap.c.min() < low or snap.c.max() > high:
                    problems.append(f"{kind.value}: c out of bounds at cycle {snap.cycle_count:g}")
                if snap.t_hat > config.RAMP_END_TIME:
                    if snap.c[-1] != config.RAMP_PLATEAU:
                        problems.append(f"{kind.value}: wall c {snap.c[-1]!r} at cycle {snap.cycle_count:g}")
                    if np.any(np.diff(snap.c) < -MONOTONE_SLACK):
                        problems.append(f"{kind.value}: c not monotone at cycle {snap.cycle_count:g}")

        reference = runs[ModelKind.NEWTONIAN].snapshots
        spread = 0.0
        for kind, result in runs.items():
            for ref, snap in zip(reference, result.snapshots):
                spread = max(spread, float(np.max(np.abs(ref.c - snap.c))))
        if spread > MODEL_C_TOL:
            problems.append(f"model spread {spread:.2e}")

        detail = "; ".join(problems) if problems else f"model spread {spread:.2e}"
        return CheckResult('concentration', "", passed=not problems, detail=detail)

    @staticmethod
    def _centerline_mu(result: StudyResult) -> List[float]:
        return [float(np.interp(config.CENTERLINE_R_HAT, s.r, s.mu)) for s in result.snapshots]

    def check_viscosity_growth(self) -> CheckResult:
        runs = self.reference_runs()
        details, ok = [], True
        for kind in NON_NEWTONIAN:
            mu = self._centerline_mu(runs[kind])
            ok &= all(b > a for a, b in zip(mu, mu[1:]))
            details.append(f"{kind.value}: " + " < ".join(f"{m:.4g}" for m in mu))
        return CheckResult('viscosity_growth', "", passed=ok, detail="; ".join(details))

    def check_concavity(self) -> CheckResult:
        runs = self.reference_runs()
        details, ok = [], True
        for kind, result in runs.items():
            for snap in result.snapshots:
                if round(snap.cycle_count, 9) not in (12.5, 34.5):
                    continue
                n = snap.v.size
                lo, hi = int(round(0.2 * (n - 1))), int(round(0.8 * (n - 1)))
                second = np.diff(snap.v[lo:hi + 1], 2)
                scale = 1e-12 * max(1.0, float(np.max(np.abs(snap.v))))
                if kind is ModelKind.NEWTONIAN:
                    good = bool(np.all(second >= -scale))
                else:
                    good = bool(np.all(second <= scale))
                ok &= good
                if not good:
                    details.append(f"{kind.value} at cycle {snap.cycle_count:g}")
        return CheckResult('concavity', "", passed=ok,
                           detail="wrong curvature: " + ", ".join(details) if details else "as expected")

    def check_axial_suppression(self) -> CheckResult:
        runs = self.reference_runs(gradient=True)
        details, ok = [], True
        for kind in NON_NEWTONIAN:
            amplitudes = [centerline_amplitude(runs[kind].history, 'w', c) for c in config.REFERENCE_CYCLES]
            ok &= all(b < a for a, b in zip(amplitudes, amplitudes[1:]))
            details.append(f"{kind.value}: " + " > ".join(f"{a:.4g}" for a in amplitudes))
        return CheckResult('axial_suppression', "", passed=ok, detail="; ".join(details))

    def check_model_proximity(self) -> CheckResult:
        runs = self.reference_runs()
        v1 = runs[ModelKind.MODEL1].snapshots[-1].v
        v2a = runs[ModelKind.MODEL2A].snapshots[-1].v
        v2b = runs[ModelKind.MODEL2B].snapshots[-1].v
        near = float(np.max(np.abs(v2a - v2b)))
        far = float(np.max(np.abs(v2a - v1)))
        return CheckResult('model_proximity', "", passed=near < far,
                           detail=f"|2a-2b| {near:.3e}, |2a-1| {far:.3e}")

    def check_rest_determinism(self) -> CheckResult:
        rest = StudyConfig(
            model=builtin_model(ModelKind.MODEL1),
            nondim=NondimInputs(re=config.REFERENCE_RE, pe=config.REFERENCE_PE, p_f=config.REFERENCE_P_F,
                                p_g=config.REFERENCE_P_G),
            n_nodes=FAST_N_NODES,
            bc_mode=BcMode(kind=BcKind.FIXED, c_tilde=config.INITIAL_CONCENTRATION),
            wall=WallDrive(WallKind.NONE),
            cycles=(0.5,),
            name="rest",
        )
        snap = run(rest).snapshots[-1]
        drift = max(float(np.max(np.abs(snap.v))), float(np.max(np.abs(snap.w))),
                    float(np.max(np.abs(snap.c - config.INITIAL_CONCENTRATION))))

        moving = replace(self.reference_study(n_nodes=FAST_N_NODES, cycles=(0.5,)),
                         model=builtin_model(ModelKind.MODEL1))
        with tempfile.TemporaryDirectory() as tmp:
            paths = []
            for k in range(2):
                path = os.path.join(tmp, f"run{k}.csv")
                write_snapshot_csv(run(moving).snapshots[-1], path)
                paths.append(path)
            identical = filecmp.cmp(paths[0], paths[1], shallow=False)

        return CheckResult('rest_determinism', "", passed=drift <= 1e-15 and identical,
                           detail=f"rest drift {drift:.1e}; reruns {'identical' if identical else 'differ'}")

    def check_self_convergence(self) -> CheckResult:
        base = replace(self.reference_study(cycles=config.REFERENCE_CYCLES), model=builtin_model(ModelKind.MODEL1))
        coarse, fine = run_many([replace(base, n_nodes=201), replace(base, n_nodes=401)], self.max_workers)
        gaps = refinement_gaps(coarse.snapshots, fine.snapshots)
        worst = max(gaps, key=gaps.get)
        return CheckResult('self_convergence', "", passed=gaps[worst] <= SELF_CONVERGENCE_TOL,
                           detail=f"max |v_201 - v_401| {gaps[worst]:.3e} (cycle {worst:g}, "
                                  f"{len(gaps)} snapshots)")

    # ------------------------------------------------------------------
    # Driver
    # ------------------------------------------------------------------

    def run(self, select: Optional[Sequence[str]] = None,
            progress: Optional[Callable[[CheckResult], None]] = None) -> VerificationReport:
        """
        Run the checks

        Args:
            select: Check keys to run (default: all)
            progress: Called with each CheckResult as it completes

        Returns:
            VerificationReport
        """
        report = VerificationReport(fast=self.fast)
        for key, title, method, fast_ok in self.checks:
            if select is not None and key not in select:
                continue
            if self.fast and not fast_ok:
                result = CheckResult(key, title, skipped=True, detail="needs N > 101 (skipped in fast mode)")
            else:
                self.logger.info(f"Running check '{key}'")
                try:
                    result = method()
                except Exception as e:
                    self.logger.error(f"Check '{key}' raised: {e}", exc_info=True)
                    result = CheckResult(key, title, passed=False, detail=f"error: {e}")
                result.title = title
            report.results.append(result)
            if progress is not None:
                progress(result)
        return report


def run_verification(fast: bool = False, select: Optional[Sequence[str]] = None,
                     max_workers: Optional[int] = None,
                     progress: Optional[Callable[[CheckResult], None]] = None) -> VerificationReport:
    """Run the acceptance suite"""
    return AcceptanceSuite(fast, max_workers).run(select, progress)


def print_check(result: CheckResult):
    """Print one check line with color coding"""
    line = f"{result.key:18} {result.title} - {result.detail}"
    if result.skipped:
        print_warning(line)
    elif result.passed:
        print_success(line)
    else:
        print_error(line)


def print_report(report: VerificationReport):
    passed = sum(r.passed for r in report.results if not r.skipped)
    skipped = sum(r.skipped for r in report.results)
    total = len(report.results) - skipped
    print_info(f"{passed}/{total} checks passed, {skipped} skipped")
