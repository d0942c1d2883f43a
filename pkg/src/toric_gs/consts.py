"""Default tolerances, builtin polytope data and environment settings."""

import os

# polytope
MAX_DIM = 4
LATTICE_POINT_CAP = 10**7

# quadrature
GM_DEGREE = 7
GM_TOL = 1e-10
GM_MAX_DEPTH = 12
EXACT_REL_TOL = 1e-12
QUADRATURE_REL_TOL = 1e-9
POSITIVITY_SAMPLES = 24
POSITIVITY_MARGIN = 1e-9

# soliton solvers
KR_MAX_ITER = 200
KR_TOL = 1e-12
BARYCENTER_TOL = 1e-10

# toric delta
DELTA_STARTS = 64
DELTA_TOL = 1e-9

# 1D Monge-Ampere
MA_RADIUS = 20.0
MA_NODES = 2001
MA_TOL = 1e-8
MA_MAX_ITER = 100
MA_MIN_DAMPING = 2.0**-30
MA_WINDOW_TOL = 1e-6
MA_MAX_RADIUS = 320.0
SEED_MARGIN = 30.0
SEED_MAX_SPAN = 700.0
SEED_OVERSAMPLING = 8
SEED_ENDPOINT_ZONE = 1e-8
CONVEXITY_TOL = 1e-12
SLOPE_TOL = 1e-10
DENSITY_FLOOR = 1e-300
GAUSS_LEGENDRE_NODES = 16
MAX_BUMPS = 5
INEQUALITY_TOL = 1e-10
DING_SHIFT_NODES = 5
TWIST_TIMES = (0.25, 0.5, 0.75)

DEFAULT_SEED = 0

# Anticanonical moment polytopes of the smooth toric del Pezzo surfaces and P^1,
# given by vertices. Each entry is checked for reflexivity when it is loaded.
BUILTIN_VERTICES: dict[str, list[list[int]]] = {
    "p1": [[-1], [1]],
    "p2": [[-1, -1], [2, -1], [-1, 2]],
    "p1xp1": [[-1, -1], [1, -1], [1, 1], [-1, 1]],
    "bl1p2": [[-1, 0], [0, -1], [2, -1], [-1, 2]],
    "bl2p2": [[-1, 0], [0, -1], [1, -1], [1, 0], [-1, 2]],
    "bl3p2": [[-1, 0], [0, -1], [1, -1], [1, 0], [0, 1], [-1, 1]],
}

THREADS_ENV = "TORIC_GS_THREADS"


def max_threads() -> int:
    """Parallelism cap read from `TORIC_GS_THREADS`, defaulting to the CPU count."""
    raw = os.environ.get(THREADS_ENV)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            value = 0
        if value > 0:
            return value
    return os.cpu_count() or 1
