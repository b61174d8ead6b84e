import json
from pathlib import Path

import numpy as np
from sklearn.utils import check_array


class NotRunError(Exception):
    pass


class ValidationError(Exception):
    pass


class DegenerateCutError(ValidationError):
    """The cut segment is too short to define a cut line"""


class BadInputError(ValidationError):
    """Non-finite or out-of-domain network input"""


class NotACutcellError(ValidationError):
    """The boundary does not cut the requested cell"""


class SingularPencilError(Exception):
    """All modes of the stiffness matrix fall below the spectral cut-off"""


class VersionMismatchError(Exception):
    """File layout, header or model metadata does not match this version"""


class CorruptFileError(Exception):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergedError(Exception):
    def __init__(self, epoch, loss):
        super().__init__(f"Training diverged at epoch {epoch} (loss={loss})")
        self.epoch = epoch
        self.loss = loss


class LambdaProviderError(Exception):
    def __init__(self, cell, cause):
        super().__init__(f"No stabilization parameter for cell {cell}: {cause}")
        self.cell = cell
        self.cause = cause


class NoConvergenceError(Exception):
    def __init__(self, iterations, residual):
        super().__init__(
            f"CG did not converge after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual


def check_finite_array(array, name="array", ensure_2d=True):
    """Validate an array-like of reals and return it as float64 ndarray

    Raises
    ------
    BadInputError
        If the array contains NaN or infinite values or is not numeric
    """
    try:
        return check_array(array, ensure_2d=ensure_2d, dtype=np.float64)
    except (ValueError, TypeError) as e:
        raise BadInputError(f"{name} must be a finite numeric array: {e}")


def check_positive(value, name):
    if not value > 0:
        raise ValidationError(f"{name} must be positive, got {value}")


def check_path_exists(path, name="path"):
    if not Path(path).exists():
        raise ValidationError(f"{name} does not exist: {path}")


def chunked(seq, size):
    """Split a sequence into consecutive chunks of at most `size` items"""
    return [seq[i : i + size] for i in range(0, len(seq), size)]


class FcmEncoder(json.JSONEncoder):
    """Special json encoder for numpy types"""

    def default(self, obj):
        # numpy encoders
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return float(obj)
        elif isinstance(obj, np.ndarray):
            return obj.tolist()
        return json.JSONEncoder.default(self, obj)


def json_dumps(obj):
    """Custom json dumps with encoder"""
    return json.dumps(obj, cls=FcmEncoder, indent=2)
