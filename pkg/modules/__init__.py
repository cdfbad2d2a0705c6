"""
Modules package for the Annuflow annular-flow solver
"""

__version__ = '1.0.0'

# Import main classes for easier access
from .constitutive import (
    ConstitutiveModel, ModelKind, ShearState, ValidationReport,
    apparent_viscosity, builtin_model, shear_index, stress_power, validate, zero_shear_ratio,
)
from .grid import RadialGrid, build_grid, div_c, div_theta, div_z
from .forcing import (
    BcKind, BcMode, BoundaryForcing, WallDrive, WallKind,
    feedback_outer_bc, mean_concentration, outer_concentration_ramp, pressure_forcing, wall_velocity,
)
from .residual import NondimParams, SemiDiscreteSystem, StateVector, jacobian, rhs
from .integrator import IntegratorConfig, StepReport, TRBDF2Integrator, integrate, step
from .pressure import PressureSnapshot, pressure_at, reconstruct
from .oracle import (
    CouetteSolution, LinearODESystem, PoiseuilleSolution, couette, dense_propagator, poiseuille_annulus,
)
from .simulation import (
    NondimInputs, PhysicalInputs, Snapshot, StudyConfig, StudyResult, StudyRunner,
    centerline_amplitude, derive_nondim, run, run_models,
)
from .config_loader import load_config, parse_config
from .report_generator import (
    emit_plot_script, generate_comparison, generate_reports, generate_verification_reports, read_snapshot_csv,
    write_snapshot_csv,
)
from .verification import run_verification

__all__ = [
    'ConstitutiveModel', 'ModelKind', 'ShearState', 'ValidationReport',
    'apparent_viscosity', 'builtin_model', 'shear_index', 'stress_power', 'validate', 'zero_shear_ratio',
    'RadialGrid', 'build_grid', 'div_c', 'div_theta', 'div_z',
    'BcKind', 'BcMode', 'BoundaryForcing', 'WallDrive', 'WallKind',
    'feedback_outer_bc', 'mean_concentration', 'outer_concentration_ramp', 'pressure_forcing', 'wall_velocity',
    'NondimParams', 'SemiDiscreteSystem', 'StateVector', 'jacobian', 'rhs',
    'IntegratorConfig', 'StepReport', 'TRBDF2Integrator', 'integrate', 'step',
    'PressureSnapshot', 'pressure_at', 'reconstruct',
    'CouetteSolution', 'LinearODESystem', 'PoiseuilleSolution', 'couette', 'dense_propagator',
    'poiseuille_annulus',
    'NondimInputs', 'PhysicalInputs', 'Snapshot', 'StudyConfig', 'StudyResult', 'StudyRunner',
    'centerline_amplitude', 'derive_nondim', 'run', 'run_models',
    'load_config', 'parse_config',
    'emit_plot_script', 'generate_comparison', 'generate_reports', 'generate_verification_reports',
    'read_snapshot_csv', 'write_snapshot_csv',
    'run_verification',
]
