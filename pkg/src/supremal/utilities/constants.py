RANK_FLAG_FACTOR = 10.0
PROJECTION_TOL = 1e-12
UNIT_TOL = 1e-12

KAPPA = 4.0
PDE_TAU_FACTOR = 4.0
C1_JUMP_BUDGET = 0.25
NEAR_MISS_FRACTION = 0.5
BOUNDARY_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12
JENSEN_TOL = 1e-12
CONVEXITY_TOL = 1e-12
CONVERGENCE_TOL = 1e-10

LAMBDA_GRID = tuple(k / 8 for k in range(1, 8))
RANDOM_LAMBDAS = 10
SEGMENT_CHUNK = 10_000
SWEEP_CHUNK = 4096

DEFAULT_SEED = 20240917
DEFAULT_SEGMENTS = 10_000
DEFAULT_MATRIX_SCALE = 1.0
DEFAULT_BUDGET = 200
DEFAULT_TRIALS = 50
MIN_RING_CELLS = 2
BUMP_CURVATURE = 2.0
MIN_BUMP_CELLS = 2
MIN_SUB_BALL_CELLS = 6
TRUNCATION_LEVELS = 16
DEFAULT_MAX_BUMPS = 3
LOCAL_RADIUS_CELLS = 3

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_WARN = 2
EXIT_CONFIG = 64
