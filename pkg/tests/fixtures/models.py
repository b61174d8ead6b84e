"""
Contains all fixtures related to surrogate models.

Any fixture added to the file will be immediately available due to
addition of this module as plugin in the project level `conftest.py`.
"""
import numpy as np
from pytest import fixture

from fcmstab.artifacts import PrecomputedModel
from fcmstab.artifacts.model.mlp_model import init_model, save_model
from fcmstab.datasets import to_training_arrays

CONSTANT_LAMBDA = 1000.0


def constant_model(value=CONSTANT_LAMBDA, n_features=12):
    """Network whose prediction is `value` for every input"""
    model = init_model([4], np.zeros(n_features), np.ones(n_features), zero=True)
    model.layers[-1][1][0] = np.log(value)
    return model


### Models definition ########################


@fixture(scope="session")
def zero_model():
    return constant_model()


@fixture(scope="session")
def small_model(oracle_train_data):
    _, _, stats = to_training_arrays(oracle_train_data)
    return init_model([8, 8], stats.mean, stats.std, seed=3)


@fixture(scope="session")
def exact_model(oracle_val_data):
    """Returns the oracle labels of the validation set"""
    return PrecomputedModel("exact", oracle_val_data.X, oracle_val_data.y)


### Files ########################


@fixture(scope="session")
def model_file(tmp_path_factory, small_model):
    path = tmp_path_factory.mktemp("models") / "model.json"
    save_model(small_model, path)
    return path
