"""
Configuration file for the Annuflow annular-flow solver
"""

import math

# ============================================================================
# GENERAL SETTINGS
# ============================================================================

SOLVER_VERSION = "1.0.0"

# Verbose output for debugging
VERBOSE = False

# ============================================================================
# OUTPUT SETTINGS
# ============================================================================

# Default output directory for snapshots and reports
OUTPUT_DIR = "./results"

# Filename formats (formatted with the study name and cycle count)
SNAPSHOT_FILENAME_FORMAT = "{name}_cycle_{cycle}.csv"
CENTERLINE_FILENAME_FORMAT = "{name}_centerline.csv"
MANIFEST_FILENAME_FORMAT = "{name}_manifest"
PLOT_SCRIPT_FILENAME_FORMAT = "{name}_plots.gp"
COMPARISON_TABLE_FILENAME_FORMAT = "{name}_comparison.csv"
COMPARISON_SCRIPT_FILENAME_FORMAT = "{name}_comparison.gp"

# Snapshot CSV column order
SNAPSHOT_COLUMNS = ("r_hat", "v_hat", "w_hat", "c_hat", "mu_hat", "h_hat")

# External plotting tool the emitted script is written for
PLOT_TOOL = "gnuplot"
PLOT_TOOL_PATH = None  # Leave as None to use system PATH

# ============================================================================
# GRID SETTINGS
# ============================================================================

DEFAULT_N_NODES = 201
MIN_N_NODES = 5

# Half-node viscosity interpolation: "arithmetic" or "harmonic"
HALF_NODE_MEAN = "arithmetic"

# ============================================================================
# INTEGRATOR SETTINGS
# ============================================================================

REL_TOL = 1e-6
ABS_TOL = 1e-8
NEWTON_TOL = 1e-10
MAX_NEWTON = 12
DT_INIT = 1e-3
DT_MAX = 0.05
SAFETY = 0.9
MAX_REJECTIONS = 10

# Step-size controller limits (growth / shrink factors per step)
DT_GROWTH_MAX = 5.0
DT_SHRINK_MIN = 0.2

# Newton line-search halvings before a damped update is taken as-is
MAX_DAMPING_HALVINGS = 5

# ============================================================================
# BOUNDARY SETTINGS
# ============================================================================

# Outer concentration ramp: c = RAMP_START + RAMP_SLOPE * t until RAMP_END_TIME
RAMP_START = 0.1
RAMP_SLOPE = 0.1
RAMP_END_TIME = 2.0
RAMP_PLATEAU = 0.3

# Feedback-switch defaults (prescribed level, optimum mean, averaging layer edge)
FEEDBACK_C_TILDE = 0.3
FEEDBACK_C_BAR = 0.25
FEEDBACK_R_BAR_HAT = 0.75

# Initial concentration over the whole gap
INITIAL_CONCENTRATION = 0.1

# ============================================================================
# STUDY SETTINGS
# ============================================================================

# Settings of the reference study: r_i = 1, r_o = 1.2, Re = 10, Pe = 1000
REFERENCE_RE = 10.0
REFERENCE_PE = 1000.0
REFERENCE_P_F = 1.0
REFERENCE_P_G = 5.0
REFERENCE_OMEGA_BAR = 1.0
REFERENCE_CYCLES = (3.5, 12.5, 34.5)

# Radial position of the centerline series
CENTERLINE_R_HAT = 0.5

CYCLE_LENGTH = 2.0 * math.pi

# ============================================================================
# PARALLELISM
# ============================================================================

# Environment variable capping the number of parallel sweep runs
THREADS_ENV_VAR = "ANNUFLOW_THREADS"

# ============================================================================
# LOGGING SETTINGS
# ============================================================================

LOG_LEVEL = "INFO"  # DEBUG, INFO, WARNING, ERROR, CRITICAL
LOG_FILE = None  # Set to a path to enable file logging
