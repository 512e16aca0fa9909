"""
Runtime configuration for covertlab.

Values come from the environment (optionally via a local .env file) with
module-level defaults. Numerical defaults live here so every module reads the
same tolerances.
"""

from __future__ import annotations

import os
import warnings
from pathlib import Path

from dotenv import find_dotenv, load_dotenv

from .errors import ConfigWarning

load_dotenv(find_dotenv(), override=False)


# ---------- Paths ----------

BASE_DIR = Path(__file__).resolve().parents[2]

OUTPUT_DIR = Path(os.getenv("COVERTLAB_OUTPUT_DIR") or (BASE_DIR / "outputs"))
SWEEP_OUTPUT_DIR = OUTPUT_DIR / "sweep_run"
SWEEP_CSV_NAME = "sweep_results.csv"

SCHEMA_DIR = BASE_DIR / "schemas"


# ---------- Numerical defaults ----------

DEFAULT_ABS_TOL = 1e-10
DEFAULT_REL_TOL = 1e-8
QUAD_SUBDIVISION_LIMIT = 200

DEFAULT_ROOT_TOL = 1e-15

# Integrability exponent; 1/2 satisfies the three conditions for every catalog family
DEFAULT_ZETA = 0.5

# Achievability margin exponent, midpoint of (1, 3/2)
DEFAULT_CHI = 1.25

# gamma bracket for root solving: min(0.5, 1 - zeta - eps)
GAMMA_BRACKET_CAP = 0.5
GAMMA_BOUNDARY_EPS = 1e-3

# Characteristic-function grid
T_GRID_POINTS = 201
T_GRID_HALF_WIDTH = 10.0

# Key length search
RHO_GRID_POINTS = 40
RHO_GRID_MAX = 0.9
DEFAULT_XI_EXPONENT = 0.4
# input-law tail mass dropped on each side of the outer Psi quadrature
PSI_OUTER_TAIL = 1e-15

# Simulator
DEFAULT_MESSAGE_CAP = 16
DEFAULT_NUM_KEYS = 2
DEFAULT_TRIALS = 2000
DEFAULT_SEED = 0
DEFAULT_RATE_FRACTION = 0.7
CI_CONFIDENCE_LEVEL = 0.95  # Wilson score interval on the error rate


def _env_int(name: str, default: int, *, minimum: int = 1) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        warnings.warn(
            f"[settings] {name}={raw!r} is not an integer; using {default}.",
            ConfigWarning,
        )
        return default
    if value < minimum:
        warnings.warn(
            f"[settings] {name}={value} is below {minimum}; using {default}.",
            ConfigWarning,
        )
        return default
    return value


def max_workers() -> int:
    """Worker cap for trial-level parallelism (COVERTLAB_THREADS)."""
    return _env_int("COVERTLAB_THREADS", 1)


def max_codebook_entries() -> int:
    """Memory budget for a codebook, counted in float64 entries."""
    return _env_int("COVERTLAB_MAX_CODEBOOK_ENTRIES", 20_000_000)
