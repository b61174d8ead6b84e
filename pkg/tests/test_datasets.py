"""
Testing of dataset generation, persistence and preprocessing.
"""
import numpy as np
import pandas as pd
import pytest
from joblib import parallel_backend

from fcmstab.artifacts import Dataset
from fcmstab.artifacts.data import dataset_columns
from fcmstab.datasets import (
    EndpointDistribution,
    FeatureStats,
    edge_points,
    enumerate_configs,
    generate,
    generate_splits,
    read_csv,
    remove_overlap,
    to_training_arrays,
    write_csv,
)
from fcmstab.datasets.io import meta_path
from fcmstab.utils.common import (
    CorruptFileError,
    ValidationError,
    VersionMismatchError,
)
from tests.fixtures.datasets import ORACLE_N_AI, chord_length_oracle


def right_half_oracle(config):
    """Fails for every chord ending at x <= 0"""
    if config.B[0] > 0:
        return 1.0
    raise ValueError("no lambda")


########################################
# Endpoint distributions
########################################


def test_log_edge_points():
    np.testing.assert_allclose(
        edge_points(EndpointDistribution(5)),
        [1e-4, 1e-2, 1.0, 1.99, 1.9999],
        rtol=1e-12,
    )


def test_linear_edge_points():
    t = edge_points(EndpointDistribution(3, spacing="linear"))
    np.testing.assert_allclose(t, [0.5, 1.0, 1.5])


@pytest.mark.parametrize(
    "kwargs",
    [{"n_per_edge": 4}, {"n_per_edge": 1}, {"d_min": 0.0}, {"spacing": "cubic"}],
)
def test_invalid_distributions(kwargs):
    with pytest.raises(ValidationError):
        EndpointDistribution(**kwargs)


def test_enumerated_configs_are_normalized():
    A, B = enumerate_configs(EndpointDistribution(3))
    pytest.assume(A.shape == (27, 2))
    pytest.assume(np.all(A[:, 1] == 1.0))
    # no end point on the top edge
    pytest.assume(np.all((B[:, 1] < 1.0) | (B[:, 0] == 1.0)))


@pytest.mark.parametrize(
    "n_per_edge,count", [(399, 477603), (199, 118803), (179, 96123)]
)
def test_configuration_counts(n_per_edge, count):
    A, B = enumerate_configs(EndpointDistribution(n_per_edge))
    pytest.assume(len(A) == len(B) == count == 3 * n_per_edge**2)
    unique = np.unique(np.hstack([A, B]), axis=0)
    pytest.assume(len(unique) == count)


########################################
# Generation
########################################


def test_generated_dataset(tiny_dataset):
    pytest.assume(len(tiny_dataset) == 27)
    pytest.assume(tiny_dataset.n_features == 12)
    endpoints = tiny_dataset.endpoints
    lengths = np.hypot(*(endpoints[:, 2:] - endpoints[:, :2]).T)
    np.testing.assert_allclose(tiny_dataset.y, 1.0 + lengths, rtol=1e-14)
    pytest.assume(tiny_dataset.metadata["n_per_edge"] == 3)
    pytest.assume(tiny_dataset.metadata["layout"] == "Tv+T|0.002")


def test_failed_oracle_calls_are_skipped():
    dataset = generate(EndpointDistribution(3), oracle=right_half_oracle)
    # per start point: three ends on the right edge and one on the bottom edge
    pytest.assume(len(dataset) == 12)
    pytest.assume(np.all(dataset.endpoints[:, 2] > 0))


def test_non_positive_lambdas_are_skipped():
    dataset = generate(EndpointDistribution(3), oracle=lambda c: c.B[0])
    pytest.assume(len(dataset) == 12)


def test_generation_order_does_not_depend_on_workers(tiny_dataset):
    with parallel_backend("threading"):
        dataset = generate(
            EndpointDistribution(3),
            oracle=chord_length_oracle,
            n_jobs=2,
            chunk_size=5,
        )
    pd.testing.assert_frame_equal(dataset.frame, tiny_dataset.frame)


def test_oracle_dataset(oracle_val_data):
    pytest.assume(len(oracle_val_data) == 27)
    pytest.assume(np.all(oracle_val_data.y > 0))
    pytest.assume(oracle_val_data.metadata["n_ai"] == 5)


def test_log_spacing_reaches_larger_lambdas(oracle_train_data):
    linear = generate(
        EndpointDistribution(5, spacing="linear"), ORACLE_N_AI, name="linear"
    )
    pytest.assume(len(linear) > 0)
    # near-corner slivers only exist with log spacing
    pytest.assume(oracle_train_data.y.max() >= 10 * linear.y.max())


def test_remove_overlap():
    small = generate(EndpointDistribution(3), oracle=chord_length_oracle)
    large = generate(EndpointDistribution(5), oracle=chord_length_oracle)
    reduced = remove_overlap(small, large)
    pytest.assume(len(large) == 75)
    pytest.assume(len(reduced) == 48)
    pytest.assume(not (reduced.config_keys() & small.config_keys()))


def test_splits_do_not_share_configurations():
    train, val, test = generate_splits(3, 5, 5, oracle=chord_length_oracle)
    pytest.assume([d.name for d in (train, val, test)] == ["train", "val", "test"])
    pytest.assume(len(train) == 27)
    pytest.assume(len(val) == 48)
    # the test grid equals the validation grid
    pytest.assume(len(test) == 0)
    pytest.assume(not (train.config_keys() & val.config_keys()))


def test_samples_rebuild_configurations(tiny_dataset):
    sample = next(tiny_dataset.samples())
    pytest.assume(sample.config.A[1] == 1.0)
    pytest.assume(sample.features.shape == (12,))
    pytest.assume(sample.lam == tiny_dataset.y[0])


########################################
# Dataset invariants
########################################


def test_duplicates_are_rejected(tiny_dataset):
    frame = pd.concat([tiny_dataset.frame, tiny_dataset.frame.iloc[:1]])
    with pytest.raises(ValidationError):
        Dataset("duplicated", frame)


def test_non_positive_lambda_is_rejected(tiny_dataset):
    frame = tiny_dataset.frame.copy()
    frame.loc[0, "lambda"] = 0.0
    with pytest.raises(ValidationError):
        Dataset("broken", frame)


def test_unknown_split_is_rejected(tiny_dataset):
    with pytest.raises(ValidationError):
        Dataset("tiny", tiny_dataset.frame, split="holdout")


########################################
# CSV files
########################################


def test_csv_round_trip(tiny_dataset, temp_file):
    write_csv(tiny_dataset, temp_file)
    loaded = read_csv(temp_file)
    pd.testing.assert_frame_equal(loaded.frame, tiny_dataset.frame)
    pytest.assume(loaded.name == "test")
    pytest.assume(loaded.metadata["n_per_edge"] == 3)
    pytest.assume(loaded.metadata["d_min"] == 1e-4)


def test_empty_dataset_round_trip(temp_file):
    empty = Dataset("empty", pd.DataFrame(columns=dataset_columns(12)))
    write_csv(empty, temp_file)
    pytest.assume(len(read_csv(temp_file)) == 0)


def test_header_mismatch(temp_file):
    temp_file.write_text(",".join(dataset_columns(11)) + "\n")
    with pytest.raises(VersionMismatchError):
        read_csv(temp_file)


def test_malformed_value_reports_its_line(tiny_dataset, temp_file):
    write_csv(tiny_dataset, temp_file)
    lines = temp_file.read_text().splitlines()
    fields = lines[3].split(",")
    fields[5] = "abc"
    lines[3] = ",".join(fields)
    temp_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptFileError) as info:
        read_csv(temp_file)
    assert info.value.line == 4


def test_ragged_row_reports_its_line(tiny_dataset, temp_file):
    write_csv(tiny_dataset, temp_file)
    lines = temp_file.read_text().splitlines()
    lines[2] += ",1.0"
    temp_file.write_text("\n".join(lines) + "\n")
    with pytest.raises(CorruptFileError) as info:
        read_csv(temp_file)
    assert info.value.line == 3


def test_corrupt_metadata(tiny_dataset, temp_file):
    write_csv(tiny_dataset, temp_file)
    meta_path(temp_file).write_text("garbage\n")
    with pytest.raises(CorruptFileError) as info:
        read_csv(temp_file)
    assert info.value.line == 1


########################################
# Training arrays
########################################


def test_training_arrays(tiny_dataset):
    X_log, y_log, stats = to_training_arrays(tiny_dataset)
    pytest.assume(X_log.shape == (27, 12))
    pytest.assume(y_log.shape == (27, 1))
    Z = stats.standardize(X_log)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
    spread = Z.std(axis=0)
    pytest.assume(np.all(np.isclose(spread, 1.0) | np.isclose(spread, 0.0)))


def test_validation_arrays_reuse_training_statistics(tiny_dataset, oracle_val_data):
    _, _, stats = to_training_arrays(tiny_dataset)
    _, _, reused = to_training_arrays(oracle_val_data, stats)
    pytest.assume(reused is stats)


def test_constant_features_get_unit_scale():
    stats = FeatureStats.fit(np.array([[1.0, 2.0], [1.0, 3.0]]))
    np.testing.assert_allclose(stats.mean, [1.0, 2.5])
    np.testing.assert_allclose(stats.std, [1.0, 0.5])


def test_empty_training_arrays():
    empty = Dataset("empty", pd.DataFrame(columns=dataset_columns(12)))
    with pytest.raises(ValidationError):
        to_training_arrays(empty)
