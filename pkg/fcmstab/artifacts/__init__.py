"""
Containers for stabilization datasets and surrogate models.

Samples and trained networks are wrapped into classes that validate their
invariants on construction.
"""
from .data.stabilization_data import Dataset, StabilizationSample
from .model.mlp_model import MlpModel, PrecomputedModel
