from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from sklearn.metrics import mean_squared_error

from fcmstab.artifacts.data.stabilization_data import CONFIG_COLUMNS, Dataset
from fcmstab.evaluators.evaluator import Evaluator
from fcmstab.evaluators.utils.validation import (
    check_data_instance,
    check_positive_targets,
    check_predictor,
)
from fcmstab.utils.common import ValidationError
from fcmstab.utils.constants import OUTLIER_THRESHOLD

PERCENTILES = (50, 95, 100)


@dataclass(eq=False)
class EvalReport:
    """Accuracy of a surrogate on a labelled dataset

    Parameters
    ----------
    mse : float
        Mean squared error of ln(lambda)
    relative_errors : numpy.ndarray
        e_r = (lambda_p - lambda_g) / lambda_g per sample
    predictions : numpy.ndarray
        lambda_p per sample
    outlier_rate : float
        Fraction of samples with |e_r| above the threshold
    percentiles : dict
        Percentile of |e_r| keyed by 50, 95 and 100
    threshold : float
    """

    mse: float
    relative_errors: np.ndarray
    predictions: np.ndarray
    outlier_rate: float
    percentiles: dict = field(default_factory=dict)
    threshold: float = OUTLIER_THRESHOLD

    @property
    def within_threshold(self) -> float:
        return 1.0 - self.outlier_rate

    def summary(self) -> pd.DataFrame:
        rows = [
            ("mse_log", self.mse),
            ("outlier_rate", self.outlier_rate),
            ("within_threshold", self.within_threshold),
            ("samples", float(len(self.relative_errors))),
        ]
        rows += [(f"abs_er_p{q}", value) for q, value in self.percentiles.items()]
        frame = pd.DataFrame(rows, columns=["metric", "value"])
        frame.name = "surrogate_accuracy"
        return frame

    def per_sample(self, dataset: Dataset) -> pd.DataFrame:
        frame = dataset.frame[CONFIG_COLUMNS].copy()
        frame["lambda"] = dataset.y
        frame["lambda_pred"] = self.predictions
        frame["e_r"] = self.relative_errors
        frame.name = "relative_errors"
        return frame


def evaluate(model, dataset: Dataset, batch_size=8192, threshold=OUTLIER_THRESHOLD):
    """Relative-error report of `model` on a labelled dataset.

    Parameters
    ----------
    model : MlpModel
        Any object with ``predict(features)`` returning standard-cell lambdas
    dataset : Dataset
        Non-empty dataset with oracle lambdas
    batch_size : int
        Rows per inference call
    threshold : float
        Outlier limit on |e_r|, by default 0.05

    Returns
    -------
    EvalReport
    """
    if len(dataset) == 0:
        raise ValidationError(f"Dataset {dataset.name} is empty")
    X, y = dataset.X, dataset.y
    predictions = np.concatenate(
        [
            model.predict(X[start : start + batch_size])
            for start in range(0, len(X), batch_size)
        ]
    )
    relative = (predictions - y) / y
    magnitude = np.abs(relative)
    return EvalReport(
        mse=float(mean_squared_error(np.log(y), np.log(predictions))),
        relative_errors=relative,
        predictions=predictions,
        outlier_rate=float(np.mean(magnitude > threshold)),
        percentiles={q: float(np.percentile(magnitude, q)) for q in PERCENTILES},
        threshold=threshold,
    )


class SurrogateAccuracy(Evaluator):
    """
    Accuracy of the stabilization surrogate against oracle labels.

    Reports the MSE of ln(lambda), the outlier rate (|e_r| above the threshold)
    and percentiles of |e_r|, plus the per-sample relative errors.

    Required Artifacts
    ------------------
        - model: :class:`fcmstab.artifacts.MlpModel`
        - assessment_data: :class:`fcmstab.artifacts.Dataset`

    Parameters
    ----------
    threshold : float
        Outlier limit on |e_r|, by default 0.05
    batch_size : int
        Rows per inference call, by default 8192
    """

    required_artifacts = {"model", "assessment_data"}

    def __init__(self, threshold=OUTLIER_THRESHOLD, batch_size=8192):
        super().__init__()
        self.threshold = threshold
        self.batch_size = batch_size
        self.report = None

    def _validate_arguments(self):
        check_predictor(self.model)
        check_data_instance(self.assessment_data, "assessment_data")
        check_positive_targets(self.assessment_data)

    def _setup(self):
        self.metadata["split"] = self.assessment_data.split

    def evaluate(self):
        self.report = evaluate(
            self.model, self.assessment_data, self.batch_size, self.threshold
        )
        self.logger.info(
            "%s on %s: mse %.4e, %.2f%% within %.0f%%, max |e_r| %.4f",
            self.name,
            self.assessment_data.name,
            self.report.mse,
            100 * self.report.within_threshold,
            100 * self.threshold,
            self.report.percentiles[100],
        )
        self.results = [
            self.report.summary(),
            self.report.per_sample(self.assessment_data),
        ]
        return self
