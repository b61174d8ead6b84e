############# Validation related functionality ##################

import numpy as np
import pandas as pd

from fcmstab.artifacts.data.stabilization_data import Dataset
from fcmstab.utils.common import ValidationError

##############################
# Checking individual artifacts
##############################


def check_instance(obj, inst_type, message=None):
    if not message:
        message = f"Object {obj} should be an instance of {inst_type.__name__}"
    if not isinstance(obj, inst_type):
        raise ValidationError(message)


def check_data_instance(obj, name="Data"):
    check_instance(obj, Dataset, f"{name} should be an instance of Dataset")


def check_existence(obj, name=None):
    message = f"Missing object {name}"
    if isinstance(obj, (pd.DataFrame, pd.Series, Dataset)):
        if len(obj) == 0:
            raise ValidationError(message)
    elif obj is None:
        raise ValidationError(message)


def check_predictor(obj, name="Model"):
    """Models only need a callable ``predict``"""
    if not callable(getattr(obj, "predict", None)):
        raise ValidationError(f"{name} must provide a predict method")


#################################
# Checking evaluator requirements
#################################


def check_positive_targets(data, name="Data"):
    if not np.all(data.y > 0):
        raise ValidationError(f"{name} holds non-positive stabilization parameters")
