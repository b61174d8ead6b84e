"""
Cut configurations, cut-distance features and boundary/cell intersection.
"""
from .boundary import Boundary, CircleBoundary, FlowerBoundary, PolygonBoundary
from .cut import (
    CutConfig,
    Edge,
    Side,
    StandardCell,
    edge_of,
    from_standard_cell,
    mirror_config,
    normalize_config,
    physical_side,
    rotate_config,
    to_standard_cell,
)
from .extraction import CutExtraction, crosses_cell, extract_cut
from .features import FeatureLayout, cut_distances, cut_distances_batch
