# constants used in the qoffload module

# physical defaults
DEFAULT_NUM_WDS = 4
DEFAULT_SLOTS_PER_BLOCK = 5
DEFAULT_SLOT_SECONDS = 0.1
DEFAULT_TASK_CYCLES = 1e10
DEFAULT_ARRIVAL_PROB = 0.4
DEFAULT_BANDWIDTH_HZ = 1e6
DEFAULT_SNR_GAP = 1.5
DEFAULT_CAP_WD = 1e-28
DEFAULT_CAP_SER = 1e-29
DEFAULT_BITS_PER_CYCLE = 1e-5
DEFAULT_F_MAX_WD = 1e9
DEFAULT_F_MAX_SER = 1e10
DEFAULT_WEIGHTS = (1.0, 1.0, 1.0, 1.0)
DEFAULT_DISCOUNT = 0.9
DEFAULT_FEATURE_DIM = 30
DEFAULT_CELL_RADIUS_M = 200.0
DEFAULT_MIN_DISTANCE_M = 10.0
DEFAULT_PATHLOSS = (30.6, 37.6)  # PL_dB = a + b * log10(d)
DEFAULT_SHADOW_STD_DB = 10.0
DEFAULT_NOISE_DBM_PER_HZ = -174.0
DEFAULT_SEED = 2024

# learning defaults
DEFAULT_STEP_ALPHA0 = 0.01
DEFAULT_STEP_TAU0 = 1000.0
DEFAULT_TOLERANCE = 1e-3
# the power iterate starts at the power that offloads this many tasks at the mean gain
DEFAULT_INITIAL_OFFLOAD_TASKS = 0.5
# actions move this much slower than the Q parameters
DEFAULT_ACTION_STEP_SCALE = 0.01
DEFAULT_INITIAL_WD_TASKS = 0
DEFAULT_ACTION_JITTER_STD = 0.0

# baseline defaults
DEFAULT_EVEN_FRACTION = 0.5
DEFAULT_BINARY_POWER_CAP = 1.0  # watts
DEFAULT_FIXED_SERVER_RATE = 5e9

# experiment defaults
DEFAULT_HORIZON_BLOCKS = 2000
DEFAULT_NUM_SEEDS = 3
DEFAULT_MOVING_AVERAGE_WINDOW = 100

# ζ·W may not exceed this many bits per second per hertz in one offload slot
MAX_SPECTRAL_EFFICIENCY = 30.0

# feature bank input indices (action coordinate first)
WD_POWER_INDEX = 0
WD_QUEUE_INDEX = 1
WD_CHANNEL_INDEX = 2
WD_ARRIVALS_OFFSET = 3

# numerical tolerances
FINITE_DIFF_STEP = 1e-6
GRADCHECK_TOLERANCE = 1e-5
VALUE_ITERATION_TOLERANCE = 1e-9
VALUE_ITERATION_MAX_SWEEPS = 100_000
E1_SERIES_CUTOFF = 1.0
E1_MAX_TERMS = 500
E1_EPSILON = 1e-16

# CSV schemas
WD_TRACE_HEADER = (
    "block",
    "wd_id",
    "cost",
    "e_wd",
    "e_off",
    "q_wd",
    "td_err",
    "grad_norm",
    "theta_rel_change",
)
SYSTEM_TRACE_HEADER = (
    "block",
    "cost_ser",
    "e_ser",
    "q_ser",
    "rho",
    "grad_norm",
    "eta_rel_change",
    "cost_total",
    "discounted_cum",
)
SWEEP_HEADER = (
    "axis",
    "value",
    "policy",
    "mean",
    "std",
    "tail_bound",
    "num_seeds",
    "num_failed",
)
WD_TRACE_FILE = "wd_trace.csv"
SYSTEM_TRACE_FILE = "system_trace.csv"
SUMMARY_FILE = "summary.json"
SWEEP_FILE = "sweep.csv"
SWEEP_SUMMARY_FILE = "sweep_summary.json"

# a residual within half a cycle of a whole task is rounding noise
RESIDUAL_SNAP_CYCLES = 0.5
