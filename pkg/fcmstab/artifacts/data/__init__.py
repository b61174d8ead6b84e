from .stabilization_data import (
    Dataset,
    StabilizationSample,
    dataset_columns,
    feature_columns,
)
