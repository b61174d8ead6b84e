"""
Contains all fixtures related to dataset creation.

Any fixture added to the file will be immediately available due to
addition of this module as plugin in the project level `conftest.py`.

The oracle datasets use a shallow integration depth: the values are not
converged, but every code path of the generation is exercised.
"""
from pytest import fixture

from fcmstab.datasets import EndpointDistribution, generate, write_csv

ORACLE_N_AI = 5


def chord_length_oracle(config):
    """Cheap stand-in for the eigenvalue oracle, positive for every chord"""
    return 1.0 + config.length


### Datasets definition ########################


@fixture(scope="session")
def tiny_dataset():
    """27 samples labelled with the chord length oracle"""
    return generate(EndpointDistribution(3), oracle=chord_length_oracle, name="tiny")


@fixture(scope="session")
def oracle_train_data():
    """75 samples labelled with the eigenvalue oracle"""
    return generate(
        EndpointDistribution(5), ORACLE_N_AI, name="train", split="train"
    )


@fixture(scope="session")
def oracle_val_data():
    return generate(EndpointDistribution(3), ORACLE_N_AI, name="val", split="val")


### Files ########################


@fixture(scope="session")
def dataset_files(tmp_path_factory, oracle_train_data, oracle_val_data):
    """Train and validation datasets written to CSV"""
    folder = tmp_path_factory.mktemp("datasets")
    paths = {"train": folder / "train.csv", "val": folder / "val.csv"}
    write_csv(oracle_train_data, paths["train"])
    write_csv(oracle_val_data, paths["val"])
    return paths
