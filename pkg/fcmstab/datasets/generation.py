"""
Generation of stabilization datasets.

Endpoint samples are placed on every edge of the standard cell. Start points
come from the top edge and end points from the three remaining edges, so every
cut configuration is generated exactly once in normalized form.
"""
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from fcmstab.artifacts.data.stabilization_data import (
    CONFIG_COLUMNS,
    TARGET_COLUMN,
    Dataset,
    feature_columns,
)
from fcmstab.geometry.cut import CutConfig, Edge, StandardCell
from fcmstab.geometry.features import FeatureLayout, cut_distances_batch
from fcmstab.modules.eig_oracle import lambda_oracle
from fcmstab.modules.quadrature import IntegrationParams
from fcmstab.utils import global_logger
from fcmstab.utils.common import ValidationError, chunked
from fcmstab.utils.constants import REFERENCE_N_AI

SPACINGS = ("log", "linear")


@dataclass(frozen=True)
class EndpointDistribution:
    """Placement of endpoint samples along each edge

    Parameters
    ----------
    n_per_edge : int
        Odd number of samples per edge, at least 3
    d_min : float
        Smallest distance to a vertex for logarithmic spacing, by default 1e-4
    spacing : str
        "log" (geometric towards the vertices) or "linear", by default "log"
    """

    n_per_edge: int = 399
    d_min: float = 1e-4
    spacing: str = "log"

    def __post_init__(self):
        if self.n_per_edge < 3 or self.n_per_edge % 2 == 0:
            raise ValidationError(
                f"n_per_edge must be odd and at least 3, got {self.n_per_edge}"
            )
        if not 1e-6 <= self.d_min < 1:
            raise ValidationError(f"d_min must be in [1e-6, 1), got {self.d_min}")
        if self.spacing not in SPACINGS:
            raise ValidationError(f"spacing must be one of {SPACINGS}")


def edge_points(dist: EndpointDistribution) -> np.ndarray:
    """Sorted arc coordinates t in (0, 2) of the samples on one edge.

    Logarithmic spacing places (n - 1) / 2 geometrically spaced distances
    d_min = d_1 < ... < d_m < 1 from each vertex plus the edge midpoint.

    >>> [round(t, 12) for t in edge_points(EndpointDistribution(3)).tolist()]
    [0.0001, 1.0, 1.9999]
    """
    n = dist.n_per_edge
    if dist.spacing == "linear":
        return 2.0 * np.arange(1, n + 1) / (n + 1)
    m = (n - 1) // 2
    distances = np.geomspace(dist.d_min, 1.0, m + 1)[:-1]
    return np.concatenate([distances, [1.0], (2.0 - distances)[::-1]])


def enumerate_configs(dist: EndpointDistribution) -> Tuple[np.ndarray, np.ndarray]:
    """Normalized endpoints of every configuration, shape (3 n^2, 2) each.

    The order is lexicographic in (start index, end index); end points run
    clockwise over RIGHT, BOTTOM and LEFT.
    """
    t = edge_points(dist)
    starts = StandardCell.edge_point(Edge.TOP, t)
    ends = np.vstack(
        [
            StandardCell.edge_point(edge, t)
            for edge in (Edge.RIGHT, Edge.BOTTOM, Edge.LEFT)
        ]
    )
    A = np.repeat(starts, len(ends), axis=0)
    B = np.tile(ends, (len(starts), 1))
    return A, B


def _default_oracle(config, n_ai, params):
    return lambda_oracle(config, n_ai=n_ai, params=params).lam


def _oracle_chunk(oracle, A, B):
    values = np.empty(len(A))
    for i, (a, b) in enumerate(zip(A, B)):
        try:
            values[i] = oracle(CutConfig(tuple(a), tuple(b)))
        except Exception as e:
            global_logger.warning(
                "Oracle failed on %s -> %s: %s", tuple(a), tuple(b), e
            )
            values[i] = np.nan
    return values


def generate(
    dist: EndpointDistribution,
    n_ai: int = REFERENCE_N_AI,
    oracle: Optional[Callable[[CutConfig], float]] = None,
    layout: Optional[FeatureLayout] = None,
    name: str = "dataset",
    split: str = "none",
    n_jobs: int = 1,
    chunk_size: int = 256,
    params: Optional[IntegrationParams] = None,
    seed: int = 0,
) -> Dataset:
    """Build a dataset of 3 n^2 samples.

    Parameters
    ----------
    dist : EndpointDistribution
    n_ai : int
        Adaptive integration depth of the default oracle, by default 20
    oracle : callable, optional
        Maps a normalized CutConfig to lambda; by default the eigenvalue oracle
    layout : FeatureLayout, optional
        By default the 12-point layout
    n_jobs : int
        joblib workers; the output order does not depend on it

    Returns
    -------
    Dataset
        Configurations whose oracle call failed are skipped and reported.
    """
    layout = layout or FeatureLayout()
    oracle = oracle or partial(_default_oracle, n_ai=n_ai, params=params)
    A, B = enumerate_configs(dist)
    global_logger.info(
        "Generating %d configurations (n_per_edge=%d, %s spacing, n_ai=%d)",
        len(A),
        dist.n_per_edge,
        dist.spacing,
        n_ai,
    )
    features = cut_distances_batch(A, B, layout)
    index_chunks = chunked(np.arange(len(A)), chunk_size)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_oracle_chunk)(oracle, A[idx], B[idx]) for idx in index_chunks
    )
    lambdas = np.concatenate(results) if results else np.zeros(0)

    frame = pd.DataFrame(
        np.column_stack([A, B, features, lambdas]),
        columns=CONFIG_COLUMNS + feature_columns(layout.size) + [TARGET_COLUMN],
    )
    failed = ~np.isfinite(lambdas) | (lambdas <= 0)
    if failed.any():
        global_logger.warning(
            "Skipped %d configurations with failed oracle", failed.sum()
        )
        frame = frame.loc[~failed]
    metadata = {
        "n_per_edge": dist.n_per_edge,
        "d_min": dist.d_min,
        "spacing": dist.spacing,
        "n_ai": n_ai,
        "seed": seed,
        "layout": layout.layout_id,
    }
    dataset = Dataset(name, frame, split, metadata)
    if len(dataset):
        global_logger.info(
            "Generated %d samples, lambda in [%.6e, %.6e]",
            len(dataset),
            dataset.y.min(),
            dataset.y.max(),
        )
    return dataset


def remove_overlap(reference: Dataset, other: Dataset) -> Dataset:
    """Drop the samples of `other` whose configuration also occurs in `reference`"""
    collisions = reference.config_keys() & other.config_keys()
    if not collisions:
        return other
    global_logger.warning(
        "Removed %d configurations of %s shared with %s",
        len(collisions),
        other.name,
        reference.name,
    )
    return other.drop_keys(collisions)


def generate_splits(
    n_train=399, n_val=199, n_test=179, d_min=1e-4, n_ai=REFERENCE_N_AI, **kwargs
):
    """Train, validation and test datasets on different endpoint grids.

    Validation and test samples that coincide with a training (or validation)
    configuration, which happens for the edge midpoints, are removed.
    """
    splits = {}
    for split, n in (("train", n_train), ("val", n_val), ("test", n_test)):
        dist = EndpointDistribution(n, d_min)
        splits[split] = generate(dist, n_ai, name=split, split=split, **kwargs)
    train, val, test = splits["train"], splits["val"], splits["test"]
    val = remove_overlap(train, val)
    test = remove_overlap(val, remove_overlap(train, test))
    return train, val, test


@dataclass
class FeatureStats:
    """Per-feature mean and standard deviation of ln(x) on the training split"""

    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, X_log) -> "FeatureStats":
        mean = X_log.mean(axis=0)
        std = X_log.std(axis=0)
        constant = std == 0
        if constant.any():
            global_logger.warning(
                "Features %s are constant, their scale is set to 1",
                np.flatnonzero(constant).tolist(),
            )
            std = np.where(constant, 1.0, std)
        return cls(mean, std)

    def standardize(self, X_log) -> np.ndarray:
        return (X_log - self.mean) / self.std


def to_training_arrays(d: Dataset, stats: Optional[FeatureStats] = None):
    """Log-transformed inputs and targets.

    Parameters
    ----------
    d : Dataset
        Non-empty dataset
    stats : FeatureStats, optional
        Statistics of the training split. When omitted they are computed on
        `d`, which must then be the training split.

    Returns
    -------
    tuple
        (ln X of shape (n, features), ln lambda of shape (n, 1), stats)
    """
    if len(d) == 0:
        raise ValidationError(f"Dataset {d.name} is empty")
    X_log = np.log(d.X)
    y_log = np.log(d.y)[:, None]
    if stats is None:
        if d.split not in ("train", "none"):
            global_logger.warning(
                "Normalization statistics computed on the %s split", d.split
            )
        stats = FeatureStats.fit(X_log)
    return X_log, y_log, stats
