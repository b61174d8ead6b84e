"""Fully connected regression network for ln(lambda) from log cut distances"""
import json
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fcmstab.geometry.features import FeatureLayout
from fcmstab.utils.common import (
    BadInputError,
    CorruptFileError,
    ValidationError,
    VersionMismatchError,
    check_finite_array,
    json_dumps,
)
from fcmstab.utils.constants import DEFAULT_LAYOUT, MODEL_FILE_VERSION, STANDARD_SIDE

Layer = Tuple[np.ndarray, np.ndarray]


class MlpModel:
    """Rectifier network with an input normalization layer

    The network maps standardized log features to ln(lambda) on the standard
    cell. Hidden layers use ReLU, the single output unit is linear.

    Parameters
    ----------
    layers : list of (W, b)
        Weight matrices of shape (fan_in, fan_out) and bias vectors
    norm_mean, norm_std : array-like
        Per-feature statistics of ln(x) on the training split
    layout : str
        Feature layout id the model was trained on
    name : str, optional
        Label of the model, by default "mlp"
    """

    activation = "relu"

    def __init__(
        self,
        layers: List[Layer],
        norm_mean,
        norm_std,
        layout: str = DEFAULT_LAYOUT,
        name: str = "mlp",
        cell_side: float = STANDARD_SIDE,
    ):
        self.name = name
        self.layers = [
            (np.asarray(W, dtype=np.float64), np.asarray(b, dtype=np.float64))
            for W, b in layers
        ]
        self.norm_mean = np.asarray(norm_mean, dtype=np.float64)
        self.norm_std = np.asarray(norm_std, dtype=np.float64)
        self.layout = layout
        self.cell_side = cell_side
        self.log_input = True
        self.log_output = True
        self._validate()

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def hidden(self) -> List[int]:
        return [W.shape[1] for W, _ in self.layers[:-1]]

    def _validate(self):
        if not self.layers:
            raise ValidationError("A model needs at least one layer")
        fan_in = self.layers[0][0].shape[0]
        for W, b in self.layers:
            if W.ndim != 2 or W.shape[0] != fan_in or b.shape != (W.shape[1],):
                raise ValidationError("Layer shapes do not chain")
            if not (np.isfinite(W).all() and np.isfinite(b).all()):
                raise ValidationError("Model weights must be finite")
            fan_in = W.shape[1]
        if fan_in != 1:
            raise ValidationError("The output layer must have a single unit")
        if self.norm_mean.shape != (self.input_dim,) or self.norm_std.shape != (
            self.input_dim,
        ):
            raise ValidationError("Normalization statistics do not match input_dim")
        if not (self.norm_std > 0).all():
            raise ValidationError("norm_std must be strictly positive")

    def copy(self) -> "MlpModel":
        return MlpModel(
            [(W.copy(), b.copy()) for W, b in self.layers],
            self.norm_mean.copy(),
            self.norm_std.copy(),
            self.layout,
            self.name,
            self.cell_side,
        )

    def normalize(self, X_raw) -> np.ndarray:
        """Standardized log features"""
        return (np.log(X_raw) - self.norm_mean) / self.norm_std

    def activations(self, Z) -> List[np.ndarray]:
        """Pre-activations of every layer for standardized inputs Z"""
        pre = []
        h = Z
        for i, (W, b) in enumerate(self.layers):
            a = h @ W + b
            pre.append(a)
            h = np.maximum(a, 0.0) if i < len(self.layers) - 1 else a
        return pre

    def predict_log(self, Z) -> np.ndarray:
        """ln(lambda) for standardized inputs, shape (n,)"""
        return self.activations(np.asarray(Z, dtype=np.float64))[-1][:, 0]

    def predict(self, X_raw) -> np.ndarray:
        """Standard-cell lambda for raw clamped cut distances, shape (n,)"""
        X = check_finite_array(X_raw, "features")
        if X.shape[1] != self.input_dim:
            raise BadInputError(f"Expected {self.input_dim} features, got {X.shape[1]}")
        if (X <= 0).any():
            raise BadInputError("Cut distances must be positive")
        return np.exp(self.predict_log(self.normalize(X)))


def init_model(
    hidden: Sequence[int],
    norm_mean,
    norm_std,
    seed: int = 0,
    layout: str = DEFAULT_LAYOUT,
    zero: bool = False,
) -> MlpModel:
    """He-initialized network.

    Weights are drawn from N(0, 2 / fan_in), biases are zero. With `zero` every
    weight is zero, so the output equals the output bias.

    Parameters
    ----------
    hidden : sequence of int
        Hidden layer widths, e.g. [256] * 6
    norm_mean, norm_std : array-like
        Input normalization statistics; their length sets input_dim
    seed : int
        Seed of the weight generator
    """
    rng = np.random.default_rng(seed)
    input_dim = len(norm_mean)
    widths = [input_dim] + list(hidden) + [1]
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if fan_out < 1:
            raise ValidationError(f"Layer widths must be positive, got {hidden}")
        if zero:
            W = np.zeros((fan_in, fan_out))
        else:
            W = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
        layers.append((W, np.zeros(fan_out)))
    return MlpModel(layers, norm_mean, norm_std, layout)


def forward(model: MlpModel, x_raw):
    """Lambda on the standard cell for one feature vector or a batch.

    Raises
    ------
    BadInputError
        If the input contains non-finite values
    """
    x = np.asarray(x_raw, dtype=float)
    if x.ndim == 1:
        return float(model.predict(x[None, :])[0])
    return model.predict(x)


def parse_hidden(spec: str) -> List[int]:
    """Parse "256x6" (width x depth) or "64,32" into a list of widths

    >>> parse_hidden("1024x6")
    [1024, 1024, 1024, 1024, 1024, 1024]
    """
    spec = spec.strip().lower()
    try:
        if "x" in spec:
            width, depth = spec.split("x")
            return [int(width)] * int(depth)
        return [int(w) for w in spec.split(",") if w.strip()]
    except ValueError:
        raise ValidationError(f"Cannot parse hidden layer spec {spec!r}")


def to_dict(model: MlpModel) -> dict:
    return {
        "version": MODEL_FILE_VERSION,
        "layout": model.layout,
        "input_dim": model.input_dim,
        "cell_side": model.cell_side,
        "log_input": model.log_input,
        "log_output": model.log_output,
        "norm_mean": model.norm_mean,
        "norm_std": model.norm_std,
        "layers": [
            {"rows": W.shape[0], "cols": W.shape[1], "w": W.ravel(), "b": b}
            for W, b in model.layers
        ],
        "activation": model.activation,
    }


def save_model(model: MlpModel, path):
    """Write the model as JSON; floats are written in shortest round-trip form"""
    Path(path).write_text(json_dumps(to_dict(model)))


def load_model(path, layout: Optional[str] = None) -> MlpModel:
    """Read a model file.

    Parameters
    ----------
    path : str or Path
    layout : str, optional
        Expected feature layout; a model trained on another layout is refused

    Raises
    ------
    CorruptFileError
        If the file is not valid JSON or is missing fields
    VersionMismatchError
        If version, layout or input dimension do not match
    """
    try:
        content = json.loads(Path(path).read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CorruptFileError(f"{path} is not a valid model file: {e}")
    if not isinstance(content, dict):
        raise CorruptFileError(f"{path} is not a valid model file")
    if content.get("version") != MODEL_FILE_VERSION:
        raise VersionMismatchError(
            f"Model file version {content.get('version')}, "
            f"expected {MODEL_FILE_VERSION}"
        )
    if layout is not None and content.get("layout") != layout:
        raise VersionMismatchError(
            f"Model trained on layout {content.get('layout')!r}, expected {layout!r}"
        )
    try:
        expected_dim = FeatureLayout(content["layout"]).size
        if content["input_dim"] != expected_dim:
            raise VersionMismatchError(
                f"Model input_dim {content['input_dim']} does not match layout "
                f"{content['layout']!r} ({expected_dim} features)"
            )
        if content["activation"] != MlpModel.activation:
            raise VersionMismatchError(
                f"Unsupported activation {content['activation']}"
            )
        layers = []
        for layer in content["layers"]:
            W = np.array(layer["w"], dtype=np.float64)
            W = W.reshape(layer["rows"], layer["cols"])
            layers.append((W, np.array(layer["b"], dtype=np.float64)))
        return MlpModel(
            layers,
            content["norm_mean"],
            content["norm_std"],
            content["layout"],
            Path(path).stem,
            content["cell_side"],
        )
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise CorruptFileError(f"{path} is missing or has malformed fields: {e}")


class PrecomputedModel:
    """Stand-in model returning precomputed standard-cell lambdas

    Useful when only the outputs of a model are available, e.g. the oracle
    labels of a dataset.

    Parameters
    ----------
    name : str
    features : array
        Raw feature rows the outputs belong to
    predict_output : array
        Lambda value of every feature row
    layout : str
        Feature layout id of the rows
    """

    def __init__(self, name: str, features, predict_output, layout=DEFAULT_LAYOUT):
        self.name = name
        self.layout = layout
        outputs = np.asarray(predict_output, dtype=float).ravel()
        rows = np.asarray(features, dtype=float).tolist()
        if len(rows) != len(outputs):
            raise ValidationError("Every feature row needs one output")
        self.table = dict(zip(map(tuple, rows), outputs.tolist()))

    def predict(self, X_raw):
        rows = np.atleast_2d(np.asarray(X_raw, dtype=float)).tolist()
        try:
            return np.array([self.table[tuple(row)] for row in rows])
        except KeyError as e:
            raise BadInputError(f"No precomputed output for features {e}")
