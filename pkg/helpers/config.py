"""
Centralized configuration module for managing constants and settings used
across the project. These configurations aim to improve modularity and
readability by consolidating numeric tolerances, Monte Carlo defaults and
output locations into a single location.
"""

import os

REPORT_FOLDER = "Reports"      # The folder where JSON verification reports
                               # are written by the batch runner
CURVE_FOLDER = "Curves"        # The folder where DRT curves are written
FILE = "Scenarios.txt"         # The name of the file listing scenario configs

TASK_COLOR = "cyan"            # The color to be used for task-related messages
JOBS_ENV_VAR = "ISAC_DRT_JOBS" # Environment override for the worker count
DEFAULT_JOBS = 1               # Worker threads when nothing else is given

DEFAULT_SEED = 7               # Root seed when a config has no [run] seed
DEFAULT_TRIALS = 20_000        # Monte Carlo trials per estimate
DEFAULT_POINTS = 11            # Grid points of a DRT curve
DEFAULT_COMM_SAMPLES = 200     # Rayleigh channel draws for comm averages
DEFAULT_PSK_ORDER = 4          # QPSK
MC_BLOCK_SIZE = 2048           # Trials per random block; fixed so that results
                               # do not depend on the worker count

PD_RTOL = 1e-12                # Smallest/largest eigenvalue ratio for PD input
PSD_CLIP_RTOL = 1e-12          # Negative eigenvalues above -rtol*max are
                               # clipped to zero in matrix square roots
RANK_RTOL = 1e-10              # Default relative threshold for numerical rank
HERMITIAN_RTOL = 1e-10         # Accepted relative asymmetry of Hermitian input
TRACE_RTOL = 1e-9              # Accepted relative error of trace constraints
STRUCTURE_RTOL = 1e-10         # Kronecker-structure detection tolerance

BISECT_MAXITER = 200           # Iteration cap of every bisection
BISECT_RTOL = 1e-15            # Relative bracket width of the bisections
LOG_BISECT_XTOL = 1e-14        # Absolute width when bisecting on log2 scale

PG_STEP_INIT = 1.0             # First trial step of the projected gradient
PG_BACKTRACK = 0.5             # Step shrink factor of the line search
PG_ARMIJO = 1e-4               # Sufficient-ascent parameter
PG_MAX_HALVINGS = 60           # Line-search halvings per iteration
PG_MAX_ITER = 10_000           # Iteration cap of the projected gradient
PG_REL_TOL = 1e-10             # Relative MI gain that stops the iterations

SIGMA_FACTOR = 3.0             # Monte Carlo acceptance margin (x stderr)
IDENTITY_ATOL = 1e-9           # Closed-form identities (bits)
BLOCK_ATOL = 1e-10             # F-block identities
OPTIMUM_ATOL = 1e-6            # Closed form vs projected gradient (bits)


def default_jobs():
    """
    Resolve the number of worker threads used for Monte Carlo trial blocks.

    Returns:
        int: The value of the `ISAC_DRT_JOBS` environment variable when it
             holds a positive integer, otherwise `DEFAULT_JOBS`.
    """
    value = os.environ.get(JOBS_ENV_VAR, "")
    try:
        jobs = int(value)
    except ValueError:
        return DEFAULT_JOBS
    return jobs if jobs > 0 else DEFAULT_JOBS
