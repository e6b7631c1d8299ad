"""
Configuration settings for the forecast verification toolkit.
"""
import os
from typing import Tuple

from dotenv import load_dotenv

# Allow a local .env to override the env-backed settings below
load_dotenv()

# =============================================================================
# CSV layout
# =============================================================================
DEFAULT_OBS_COL: str = "obs"
TIME_COL: str = "time"
MISSING_MARKERS: Tuple[str, ...] = ("", "NaN")

# Forecast lead in series steps
DEFAULT_HORIZON: int = 1

# =============================================================================
# Solver settings
# =============================================================================
# Exact LAD enumeration up to this many pairs, IRLS above
LAD_EXACT_MAX_N: int = int(os.getenv("FV_LAD_EXACT_MAX_N", "500"))

IRLS_EPSILON: float = 1e-8  # Residual floor for the reweighting
IRLS_MAX_ITER: int = 200
IRLS_TOL: float = 1e-10  # Coefficient change that counts as converged

GOLDEN_TOL: float = 1e-8  # CLIPER weight search tolerance
GAMMA_TOL: float = 1e-12  # Slack on |gamma| <= 1 before it is an error

# =============================================================================
# Synthetic ensemble perturbation ranges
# =============================================================================
ENSEMBLE_BIAS_FRACTION: float = 0.3  # bias in +/- fraction * mean(x)
ENSEMBLE_GAIN_RANGE: Tuple[float, float] = (0.6, 1.4)
ENSEMBLE_NOISE_FRACTION: float = 0.5  # extra noise std in [0, fraction * sigma(x)]

# Shapes of the gen_forecast noise; "exponential" is centered and right-skewed
FORECAST_NOISE_SHAPES = ("gaussian", "exponential")

DEFAULT_SEED: int = int(os.getenv("FV_SEED", "0"))

# =============================================================================
# Scatter SVG geometry
# =============================================================================
SVG_WIDTH: int = 800
SVG_HEIGHT: int = 600
SVG_PAD_FRACTION: float = 0.05
SVG_POINT_RADIUS: int = 4
SVG_LIGHTNESS_RANGE: Tuple[float, float] = (85.0, 15.0)  # lowest -> highest skill

ENSEMBLE_CSV_COLUMNS = [
    "name",
    "nmae",
    "nrmse",
    "rho",
    "s_rmse_actual",
    "s_rmse_potential",
    "on_front",
]

# Keys of a serialized skill report, in output order
REPORT_KEYS = [
    "n",
    "horizon_h",
    "rho",
    "gamma_h",
    "sigma_x",
    "rmse_f",
    "mae_f",
    "nmae",
    "nrmse",
    "rmse_cliper",
    "mae_cliper",
    "s_rmse_actual",
    "s_mae_actual",
    "s_rmse_potential",
    "s_mse_potential",
    "mase",
    "warnings",
]

# =============================================================================
# Logging and exit codes
# =============================================================================
LOG_LEVEL: str = os.getenv("FV_LOG_LEVEL", "WARNING")

EXIT_OK: int = 0
EXIT_USAGE: int = 1
EXIT_DATA: int = 2
EXIT_DEGENERATE: int = 3
