# fictitious-domain penalization, shared by the oracle and the solver
ALPHA_FICT = 1e-10
# cut distances are clamped to this before the log transform
DISTANCE_CUTOFF = 1e-10
# endpoints closer than this to a vertex are assigned to the clockwise edge
VERTEX_TOL = 1e-12
MIN_SEGMENT_LENGTH = 1e-12
# chord / arclength ratio below which the estimator falls back to the oracle
QUALITY_THRESHOLD = 0.995
SAFETY_FACTOR = 2.0
REFERENCE_N_AI = 20
OUTLIER_THRESHOLD = 0.05
DEFAULT_LAYOUT = "Tv+T|0.002"
STANDARD_SIDE = 2.0
MODEL_FILE_VERSION = 1
