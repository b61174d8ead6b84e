"""
Generation and persistence of stabilization datasets.
"""
from .generation import (
    EndpointDistribution,
    FeatureStats,
    edge_points,
    enumerate_configs,
    generate,
    generate_splits,
    remove_overlap,
    to_training_arrays,
)
from .io import meta_path, read_csv, write_csv
