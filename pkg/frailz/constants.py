import re
from importlib.metadata import version as _pkg_version, PackageNotFoundError

PACKAGE_NAME = "frailz"

try:
    VERSION = _pkg_version(PACKAGE_NAME)
except PackageNotFoundError:
    # Fallback during source-only situations (keep in sync with pyproject if used)
    VERSION = "0.4.0"

# Fitter
THETA_BOUNDS = (1e-6, 10.0)
THETA_XATOL = 1e-4
MAX_OUTER_ITER = 200
MAX_NEWTON_ITER = 200
NEWTON_TOL = 1e-9
GRADIENT_TOL = 1e-6
MAX_STEP_HALVINGS = 40

# Residuals
RSP_CLAMP = 1e-15
OUTLIER_THRESHOLD = 3.0
SW_ALPHA = 0.05
SW_MIN_N = 3
SW_MAX_N = 5000

# Simulation
PILOT_DRAWS = 100_000
DESK_REPLICATES = 200
DESK_CLUSTER_SIZES = (10, 30, 50)

# CLI
DEFAULT_SEED = 1
DEFAULT_REPLICATES = 100
THREADS_ENV = "FRAILZ_THREADS"
MANIFEST_NAME = "manifest.json"
NA_REP = "NA"
CSV_FLOAT_FORMAT = "%.17g"

CV_PATTERN = re.compile(r"^(?:none|nocv|loocv|kfold:\d+)$", re.IGNORECASE)
THETA_PATTERN = re.compile(
    r"^(?:profile|none|fixed:(?:\d+(?:\.\d*)?|\.\d+)(?:e[+-]?\d+)?)$", re.IGNORECASE
)
CONTAMINATION_PATTERN = re.compile(
    r"^(?:none|count:\d+|fraction:(?:0?\.\d+|1(?:\.0*)?))$", re.IGNORECASE
)
ROWS_PATTERN = re.compile(r"^\d+(?:,\d+)*$")
