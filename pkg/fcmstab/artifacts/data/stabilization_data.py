"""Dataset artifact holding (cut configuration, features, lambda) samples"""
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from fcmstab.geometry.cut import CutConfig
from fcmstab.geometry.features import check_feature_vector
from fcmstab.utils import global_logger
from fcmstab.utils.common import ValidationError
from fcmstab.utils.constants import DEFAULT_LAYOUT

CONFIG_COLUMNS = ["ax", "ay", "bx", "by"]
TARGET_COLUMN = "lambda"
SPLITS = ("train", "val", "test", "none")


def feature_columns(n_features: int):
    """Names of the cut-distance columns, d01 ... dNN"""
    return [f"d{i:02d}" for i in range(1, n_features + 1)]


def dataset_columns(n_features: int):
    return CONFIG_COLUMNS + feature_columns(n_features) + [TARGET_COLUMN]


@dataclass(eq=False)
class StabilizationSample:
    """One normalized cut configuration with its raw features and oracle lambda"""

    config: CutConfig
    features: np.ndarray
    lam: float


class Dataset:
    """Class wrapper around a table of stabilization samples

    Parameters
    ----------
    name : str
        Label of the dataset
    frame : pandas.DataFrame
        Columns ``ax, ay, bx, by, d01, ..., dNN, lambda``
    split : str, optional
        One of "train", "val", "test" or "none", by default "none"
    metadata : dict, optional
        Generation metadata: n_per_edge, d_min, n_ai, seed, layout
    """

    def __init__(
        self,
        name: str,
        frame: pd.DataFrame,
        split: str = "none",
        metadata: Optional[dict] = None,
    ):
        if not isinstance(name, str):
            raise ValidationError("Dataset name must be a string")
        if split not in SPLITS:
            raise ValidationError(f"split must be one of {SPLITS}, got {split!r}")
        self.name = name
        self.split = split
        self.metadata = {"layout": DEFAULT_LAYOUT, **(metadata or {})}
        self.frame = frame.reset_index(drop=True)
        self._validate_inputs()

    @property
    def n_features(self) -> int:
        return len(self.frame.columns) - len(CONFIG_COLUMNS) - 1

    @property
    def X(self) -> np.ndarray:
        """Raw clamped cut distances"""
        return self.frame[feature_columns(self.n_features)].to_numpy(dtype=float)

    @property
    def y(self) -> np.ndarray:
        return self.frame[TARGET_COLUMN].to_numpy(dtype=float)

    @property
    def endpoints(self) -> np.ndarray:
        return self.frame[CONFIG_COLUMNS].to_numpy(dtype=float)

    def __len__(self):
        return len(self.frame)

    def samples(self) -> Iterator[StabilizationSample]:
        for ax, ay, bx, by, *rest in self.frame.itertuples(index=False, name=None):
            yield StabilizationSample(
                CutConfig((ax, ay), (bx, by), validate=False),
                np.asarray(rest[:-1], dtype=float),
                float(rest[-1]),
            )

    def config_keys(self):
        return set(map(tuple, self.endpoints.tolist()))

    def drop_keys(self, keys, name=None) -> "Dataset":
        """Copy of the dataset without the samples whose (A, B) is in `keys`"""
        mask = np.array(
            [tuple(row) not in keys for row in self.endpoints.tolist()], dtype=bool
        )
        return Dataset(
            name or self.name, self.frame.loc[mask], self.split, dict(self.metadata)
        )

    def _validate_inputs(self):
        columns = list(self.frame.columns)
        if columns != dataset_columns(self.n_features) or self.n_features < 1:
            raise ValidationError(f"Unexpected dataset columns: {columns}")
        if len(self.frame) == 0:
            return
        if not (self.y > 0).all():
            raise ValidationError("All lambda values must be positive")
        check_feature_vector(self.X, self.n_features)
        duplicated = self.frame.duplicated(subset=CONFIG_COLUMNS)
        if duplicated.any():
            raise ValidationError(
                f"{int(duplicated.sum())} duplicate cut configurations in {self.name}"
            )
        global_logger.debug("Dataset %s validated (%d samples)", self.name, len(self))
