from .estimator import (
    EstimatePolicy,
    EstimateResult,
    Method,
    estimate_batch,
    estimate_cell,
    local_config,
    standard_config,
)
