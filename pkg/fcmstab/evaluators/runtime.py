"""
Wall-clock comparison of the eigenvalue oracle and the surrogate network.

Every measurement runs one warm-up pass that is not recorded, then reports
the median and mean of `repeat` timed passes.
"""
import time
from typing import Sequence

import numpy as np
import pandas as pd

from fcmstab.artifacts.data.stabilization_data import Dataset
from fcmstab.evaluators.evaluator import Evaluator
from fcmstab.evaluators.utils.validation import (
    check_data_instance,
    check_predictor,
)
from fcmstab.geometry.cut import CutConfig
from fcmstab.modules.eig_oracle import lambda_oracle
from fcmstab.modules.quadrature import IntegrationParams
from fcmstab.utils.common import ValidationError

TIMING_COLUMNS = [
    "mode",
    "n_ai",
    "batch_size",
    "estimates",
    "median_seconds",
    "mean_seconds",
    "per_estimate_seconds",
]
MODES = ("oracle", "nn", "both")


def time_passes(run, repeat=3, warmup=1):
    """Seconds of `repeat` calls of `run`, after `warmup` untimed calls"""
    for _ in range(warmup):
        run()
    seconds = []
    for _ in range(repeat):
        start = time.perf_counter()
        run()
        seconds.append(time.perf_counter() - start)
    return np.array(seconds)


def _timing_row(mode, n_ai, batch_size, estimates, seconds):
    median = float(np.median(seconds))
    mean = float(np.mean(seconds))
    return (mode, n_ai, batch_size, estimates, median, mean, median / estimates)


def oracle_timing(
    configs: Sequence[CutConfig], n_ai_values=(6, 10, 14, 20), repeat=3, params=None
) -> pd.DataFrame:
    """Per-configuration oracle time for every integration depth"""
    if len(configs) == 0:
        raise ValidationError("At least one configuration is needed for timing")
    params = params or IntegrationParams()
    rows = []
    for n_ai in n_ai_values:

        def run():
            for config in configs:
                lambda_oracle(config, n_ai=n_ai, params=params)

        seconds = time_passes(run, repeat)
        rows.append(_timing_row("oracle", n_ai, 1, len(configs), seconds))
    frame = pd.DataFrame(rows, columns=TIMING_COLUMNS)
    frame.name = "oracle_timing"
    return frame


def surrogate_timing(
    model, X, batch_sizes=(1, 8, 64, 512, 8192), repeat=3
) -> pd.DataFrame:
    """Per-estimate inference time for every batch size.

    The feature rows are tiled to the largest batch size so every batch size
    predicts the same number of rows.
    """
    X = np.asarray(X, dtype=float)
    if len(X) == 0:
        raise ValidationError("At least one feature row is needed for timing")
    n_rows = max(max(batch_sizes), len(X))
    X = np.resize(X, (n_rows, X.shape[1]))
    rows = []
    for batch_size in batch_sizes:

        def run():
            for start in range(0, n_rows, batch_size):
                model.predict(X[start : start + batch_size])

        seconds = time_passes(run, repeat)
        rows.append(_timing_row("nn", np.nan, batch_size, n_rows, seconds))
    frame = pd.DataFrame(rows, columns=TIMING_COLUMNS)
    frame.name = "nn_timing"
    return frame


def speed_ratios(oracle: pd.DataFrame, nn: pd.DataFrame) -> pd.DataFrame:
    """Oracle time per estimate over the best surrogate time per estimate"""
    best = float(nn["per_estimate_seconds"].min())
    frame = pd.DataFrame(
        {
            "n_ai": oracle["n_ai"].to_numpy(),
            "oracle_seconds": oracle["per_estimate_seconds"].to_numpy(),
            "nn_seconds": best,
            "ratio": oracle["per_estimate_seconds"].to_numpy() / best,
        }
    )
    frame.name = "speed_ratio"
    return frame


class RuntimeBenchmark(Evaluator):
    """
    Runtime of the stabilization estimates on the configurations of a dataset.

    Required Artifacts
    ------------------
        - data: :class:`fcmstab.artifacts.Dataset`
        - model: :class:`fcmstab.artifacts.MlpModel`, for the nn and both modes

    Parameters
    ----------
    mode : str
        "oracle" sweeps n_ai, "nn" sweeps the batch size, "both" does both and
        reports their ratio
    n_ai_values : sequence of int
    batch_sizes : sequence of int
    n_configs : int, optional
        Number of dataset configurations timed by the oracle, by default all
    repeat : int
        Timed passes per setting, by default 3
    """

    required_artifacts = {"data"}

    def __init__(
        self,
        mode="both",
        n_ai_values=(6, 10, 14, 20),
        batch_sizes=(1, 8, 64, 512, 8192),
        n_configs=None,
        repeat=3,
        params: IntegrationParams = None,
    ):
        super().__init__()
        if mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {mode!r}")
        self.mode = mode
        self.n_ai_values = tuple(n_ai_values)
        self.batch_sizes = tuple(batch_sizes)
        self.n_configs = n_configs
        self.repeat = repeat
        self.params = params
        self.model = None

    def _validate_arguments(self):
        check_data_instance(self.data)
        if self.mode != "oracle":
            check_predictor(self.model)
        if self.repeat < 1:
            raise ValidationError("repeat must be at least 1")

    def _setup(self):
        data: Dataset = self.data
        n = len(data) if self.n_configs is None else min(self.n_configs, len(data))
        self.configs = [sample.config for _, sample in zip(range(n), data.samples())]
        self.X = data.X

    def evaluate(self):
        results = []
        if self.mode in ("oracle", "both"):
            results.append(
                oracle_timing(self.configs, self.n_ai_values, self.repeat, self.params)
            )
        if self.mode in ("nn", "both"):
            results.append(
                surrogate_timing(self.model, self.X, self.batch_sizes, self.repeat)
            )
        if self.mode == "both":
            results.append(speed_ratios(*results))
        for frame in results:
            self.logger.info("%s:\n%s", frame.name, frame.to_string(index=False))
        self.results = results
        return self
