"""Domain constants for sinai-spectra.

Defines default parameters and numerical tolerances that are reusable
across the services, the suites and the CLI.
"""

import numpy as np

# Relative tolerance under which two path values count as tied
TIE_TOLERANCE = 1e-12

# Smallest eigenvalue the double-precision eigensolver is trusted to resolve
SOLVER_FLOOR = 1e-12

# Absolute bisection tolerance for the tridiagonal eigensolver (twice the underflow threshold)
BISECTION_ABSTOL = 2 * np.finfo(float).tiny

# Distance (relative) under which a spectral parameter collides with an eigenvalue
SPECTRUM_COLLISION_TOLERANCE = 1e-10

# Half-width of the window used to flag a Sturm count as sitting on an eigenvalue
COUNT_BOUNDARY_TOLERANCE = 1e-13

# Maximum self-adjointness residual accepted when building a Dirichlet generator
SELF_ADJOINT_TOLERANCE = 1e-10

# Eigenvector entries below this fraction of the maximum are ignored when counting sign changes
SIGN_CHANGE_FLOOR = 1e-9

# Lower end and density of the log-spaced grid used to scan capacity-matrix determinants
ROOT_SCAN_FLOOR = 1e-13
ROOT_SCAN_POINTS_PER_DECADE = 50

# Fraction of the scan range kept away from the first pole of the capacity matrix
ROOT_SCAN_POLE_MARGIN = 1e-6

# Default number of Monte Carlo trials and the standard-error gate used for comparisons
DEFAULT_MC_TRIALS = 100_000
STANDARD_ERROR_GATE = 3.0

# Default (delta, delta', beta) thresholds of the origin-valley screen
DEFAULT_SCREEN_DELTA = 0.3
DEFAULT_SCREEN_DELTA_PRIME = 0.2
DEFAULT_SCREEN_BETA = 0.05

# Multiplier C1 in the localization half-width delta_n = rho(C1 ln ln n / ln n)
DEFAULT_WINDOW_CONSTANT = 1.0

# Largest box handled by the dense spectral propagator
SPECTRAL_SIZE_CAP = 100_000

# Brownian sampling: grid step is (h/sigma)^2 / DT_DIVISOR;
# the window must hold MIN_SPAN_FACTOR h^2/sigma^2
DT_DIVISOR = 400
MIN_SPAN_FACTOR = 50
MIN_INTERIOR_SLOPES = 100

# Laplace-transform evaluation points, in units of sigma^2 / h^2
LAPLACE_POINTS = (0.5, 1.0, 2.0)

# Series truncation for the spacing law and the annealed density
SERIES_TOLERANCE = 1e-12
MIN_SERIES_TERMS = 10

# Propagator oscillation allowed in relaxation curves before they count as non-monotone
RELAXATION_MONOTONE_TOLERANCE = 1e-3

# Report schema version embedded in every JSON report
REPORT_SCHEMA_VERSION = 1

# Environment variable providing the default worker count
JOBS_ENV_VAR = "SINAI_SPECTRA_JOBS"

# Default output directory for suite reports
DEFAULT_OUTPUT_DIR = "sinai-spectra-out"

# Suites understood by `run`
SUITES = (
    "thm1",
    "np-stats",
    "localize",
    "relax",
    "potential-identities",
    "structural",
    "rg-equiv",
    "annealed",
    "tails",
    "kmt",
)

# Walker-steps budget for a Monte Carlo localization estimate (trials x n)
MC_STEP_BUDGET = 100_000_000

# Acceptance gates of the verification suites
RELATIVE_ERROR_GATE = 0.05
ROOT_MATCH_TOLERANCE = 1e-6
IDENTITY_TOLERANCE = 1e-9
# Log-scale gaps allowed in mu(x) omega_x = mu(x+1)(1 - omega_{x+1}) and mu(x) G(x,y) = mu(y) G(y,x)
DETAILED_BALANCE_TOLERANCE = 1e-12
GREEN_SYMMETRY_TOLERANCE = 1e-10
KS_GATE = 0.01
ANNEALED_KS_GATE = 1e-3
SPACING_MEAN_GATE = 0.02
LOCALIZATION_LOWER_GATE = 0.8
RELAXATION_DEVIATION_GATE = 0.1
MIN_SCREENED_SEQUENCES = 20
INSTANCE_PASS_FRACTION = 0.9

# Relaxation times t at which P_0(X_{t / Lambda} in D) is compared with 1 - exp(-t)
RELAXATION_T_GRID = tuple(round(0.1 * k, 1) for k in range(1, 51))
