from abc import ABC, abstractmethod

import pandas as pd

from fcmstab import __version__ as version
from fcmstab.evaluators.utils.validation import check_existence
from fcmstab.utils import global_logger
from fcmstab.utils.common import NotRunError, ValidationError

# artifact keyword -> metadata key holding the artifact name
ARTIFACT_LABELS = {
    "model": "model_name",
    "data": "dataset_name",
    "assessment_data": "assessment_dataset_name",
    "problem": "problem_name",
}


class Evaluator(ABC):
    """
    Base class of the fcmstab evaluators.

    An evaluator is configured on construction and receives its artifacts
    through a call::

        evaluator = SurrogateAccuracy(threshold=0.05)
        evaluator(model=model, assessment_data=dataset).evaluate()
        frames = evaluator.get_results()

    Results are a list of pandas DataFrames, each carrying a ``name``.

    .. automethod:: __call__
    .. automethod:: _validate_arguments
    .. automethod:: _setup
    """

    #: keywords of the artifacts the evaluator cannot run without
    required_artifacts = set()

    def __init__(self):
        self._results = None
        self.artifact_keys = []
        self.logger = global_logger
        self.metadata = {}

    @property
    def name(self):
        return type(self).__name__

    @property
    def results(self):
        """
        Named DataFrames produced by :meth:`evaluate`.

        Raises
        ------
        NotRunError
            If read before :meth:`evaluate`.
        """
        if self._results is None:
            raise NotRunError(f"{self.name} has no results, call 'evaluate' first.")
        return self._results

    @results.setter
    def results(self, frames):
        if not isinstance(frames, list):
            raise ValidationError(f"{self.name} results must be a list of DataFrames")
        for frame in frames:
            if not isinstance(frame, pd.DataFrame):
                raise ValidationError(f"{self.name} produced a non-DataFrame result")
            if not getattr(frame, "name", None):
                raise ValidationError(f"{self.name} produced an unnamed DataFrame")
        self._results = frames

    def __call__(self, **artifacts):
        """
        Attach artifacts (``model``, ``data``, ``assessment_data``, ``problem``),
        validate them and prepare the run.

        Raises
        ------
        ValidationError
            For unknown or missing artifacts, or artifacts of the wrong kind.
        """
        unknown = set(artifacts) - set(ARTIFACT_LABELS)
        if unknown:
            raise ValidationError(
                f"{self.name} got unknown artifacts {sorted(unknown)}, "
                f"expected some of {sorted(ARTIFACT_LABELS)}"
            )
        for key in sorted(self.required_artifacts):
            check_existence(artifacts.get(key), key)
        self.artifact_keys = list(artifacts)
        for key, artifact in artifacts.items():
            setattr(self, key, artifact)
        self._validate_arguments()
        self._setup()
        return self

    @abstractmethod
    def evaluate(self):
        """Run the evaluation, set :attr:`results` and return self"""
        return self

    def get_results(self) -> dict:
        """Results keyed by DataFrame name"""
        return {frame.name: frame for frame in self.results}

    def get_info(self, labels: dict = None, metadata: dict = None) -> dict:
        """
        Labels and metadata describing the run.

        The metadata holds the names of the artifacts, everything the
        evaluator recorded in ``self.metadata`` and the package version.

        Parameters
        ----------
        labels : dict, optional
            Extra labels, merged over the defaults
        metadata : dict, optional
            Extra metadata, merged over the defaults
        """
        info_metadata = {**self.metadata, "source": f"fcmstab_{version}"}
        for key in self.artifact_keys:
            artifact_name = getattr(getattr(self, key), "name", None)
            if artifact_name is not None:
                info_metadata[ARTIFACT_LABELS[key]] = artifact_name
        info_metadata.update(metadata or {})
        return {
            "labels": {"evaluator": self.name, **(labels or {})},
            "metadata": info_metadata,
        }

    @abstractmethod
    def _setup(self):
        """Work that depends on the validated artifacts, before evaluate"""
        pass

    @abstractmethod
    def _validate_arguments(self):
        """Check the attached artifacts"""
        pass
