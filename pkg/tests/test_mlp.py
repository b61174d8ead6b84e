"""
Testing of the surrogate network, its file format and its training.
"""
import json

import numpy as np
import pytest

from fcmstab.artifacts.model.mlp_model import (
    MlpModel,
    forward,
    init_model,
    load_model,
    parse_hidden,
    save_model,
)
from fcmstab.datasets import to_training_arrays
from fcmstab.training import TrainConfig, gradient_check, learning_rate, train, trainer
from fcmstab.training.trainer import mse, standardize
from fcmstab.utils.common import (
    BadInputError,
    CorruptFileError,
    DivergedError,
    ValidationError,
    VersionMismatchError,
)
from tests.fixtures.models import CONSTANT_LAMBDA

QUICK_TRAINING = TrainConfig(epochs=60, batch_size=16, lr0=1e-2, log_every=0)


@pytest.fixture(scope="module")
def training_arrays(oracle_train_data, oracle_val_data):
    X_train, y_train, stats = to_training_arrays(oracle_train_data)
    X_val, y_val, _ = to_training_arrays(oracle_val_data, stats)
    return (X_train, y_train), (X_val, y_val)


########################################
# Network
########################################


def test_seeded_initialization_is_reproducible():
    first = init_model([8, 8], np.zeros(12), np.ones(12), seed=5)
    second = init_model([8, 8], np.zeros(12), np.ones(12), seed=5)
    other = init_model([8, 8], np.zeros(12), np.ones(12), seed=6)
    for (W1, b1), (W2, b2) in zip(first.layers, second.layers):
        np.testing.assert_array_equal(W1, W2)
        np.testing.assert_array_equal(b1, b2)
    pytest.assume(not np.array_equal(first.layers[0][0], other.layers[0][0]))
    pytest.assume(first.hidden == [8, 8])
    pytest.assume(first.input_dim == 12)


def test_constant_network(zero_model, rng):
    X = rng.uniform(0.01, 2.0, size=(5, 12))
    np.testing.assert_allclose(zero_model.predict(X), CONSTANT_LAMBDA, rtol=1e-12)
    value = forward(zero_model, X[0])
    pytest.assume(isinstance(value, float))
    pytest.assume(value == pytest.approx(CONSTANT_LAMBDA, rel=1e-12))


@pytest.mark.parametrize(
    "features",
    [
        np.full((1, 12), np.nan),
        np.full((1, 12), np.inf),
        np.ones((1, 11)),
        -np.ones((1, 12)),
    ],
)
def test_bad_network_input(zero_model, features):
    with pytest.raises(BadInputError):
        zero_model.predict(features)


def test_invalid_networks():
    with pytest.raises(ValidationError):
        init_model([8], np.zeros(12), np.zeros(12))
    with pytest.raises(ValidationError):
        init_model([0], np.zeros(12), np.ones(12))
    with pytest.raises(ValidationError):
        MlpModel([(np.ones((12, 2)), np.zeros(2))], np.zeros(12), np.ones(12))


def test_parse_hidden():
    pytest.assume(parse_hidden("256x6") == [256] * 6)
    pytest.assume(parse_hidden("64,32") == [64, 32])
    with pytest.raises(ValidationError):
        parse_hidden("wide")


########################################
# Model files
########################################


def test_saved_model_is_bit_exact(small_model, model_file, rng):
    loaded = load_model(model_file)
    for (W1, b1), (W2, b2) in zip(small_model.layers, loaded.layers):
        np.testing.assert_array_equal(W1, W2)
        np.testing.assert_array_equal(b1, b2)
    np.testing.assert_array_equal(loaded.norm_mean, small_model.norm_mean)
    np.testing.assert_array_equal(loaded.norm_std, small_model.norm_std)
    X = rng.uniform(0.01, 2.0, size=(10, 12))
    np.testing.assert_array_equal(loaded.predict(X), small_model.predict(X))
    pytest.assume(loaded.name == "model")


def test_truncated_model_file(model_file, tmp_path):
    broken = tmp_path / "broken.json"
    text = model_file.read_text()
    broken.write_text(text[: len(text) // 2])
    with pytest.raises(CorruptFileError):
        load_model(broken)


def test_model_file_missing_fields(model_file, tmp_path):
    content = json.loads(model_file.read_text())
    del content["layers"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(content))
    with pytest.raises(CorruptFileError):
        load_model(broken)


def test_model_file_version(model_file, tmp_path):
    content = json.loads(model_file.read_text())
    content["version"] = 99
    newer = tmp_path / "newer.json"
    newer.write_text(json.dumps(content))
    with pytest.raises(VersionMismatchError):
        load_model(newer)


def test_model_layout_is_checked(model_file):
    pytest.assume(load_model(model_file, layout="Tv+T|0.002").input_dim == 12)
    with pytest.raises(VersionMismatchError):
        load_model(model_file, layout="Tv")


def test_save_writes_json(zero_model, temp_file):
    path = temp_file.with_suffix(".json")
    save_model(zero_model, path)
    content = json.loads(path.read_text())
    pytest.assume(content["activation"] == "relu")
    pytest.assume(content["layers"][0]["rows"] == 12)


########################################
# Training
########################################


def test_learning_rate_schedule():
    cfg = TrainConfig(epochs=100, lr0=1e-2)
    pytest.assume(cfg.lr_halving_period == 25)
    pytest.assume(learning_rate(24, cfg) == 1e-2)
    pytest.assume(learning_rate(25, cfg) == 5e-3)
    pytest.assume(learning_rate(99, cfg) == 1.25e-3)
    search = TrainConfig(epochs=100, halving_divisor=8)
    pytest.assume(search.lr_halving_period == 12)


@pytest.mark.parametrize("kwargs", [{"epochs": 0}, {"lr0": 0.0}, {"batch_size": 0}])
def test_invalid_training_settings(kwargs):
    with pytest.raises(ValidationError):
        TrainConfig(**kwargs)


def test_default_batch_size():
    pytest.assume(TrainConfig().resolve_batch_size(1000) == 250)
    pytest.assume(TrainConfig().resolve_batch_size(2) == 1)
    pytest.assume(TrainConfig(batch_size=7).resolve_batch_size(1000) == 7)


def test_backpropagation_matches_finite_differences(small_model, training_arrays):
    assert gradient_check(small_model, training_arrays[0]) < 1e-5


def perturbed_gradients(monkeypatch, scale=1.0, offset=0.0):
    exact = trainer.loss_and_gradients

    def perturbed(model, Z, y):
        loss, grads = exact(model, Z, y)
        return loss, [(scale * gW + offset, scale * gb + offset) for gW, gb in grads]

    monkeypatch.setattr(trainer, "loss_and_gradients", perturbed)


def test_gradient_check_detects_scaled_gradients(
    small_model, training_arrays, monkeypatch
):
    perturbed_gradients(monkeypatch, scale=1.001)
    assert gradient_check(small_model, training_arrays[0]) > 5e-4


def test_gradient_check_tolerance(small_model, training_arrays, monkeypatch):
    perturbed_gradients(monkeypatch, offset=1e-3)
    batch = training_arrays[0]
    pytest.assume(gradient_check(small_model, batch) > 1e-5)
    # offsets far below atol are accepted
    pytest.assume(gradient_check(small_model, batch, atol=1e3) < 1e-5)
    with pytest.raises(ValidationError):
        gradient_check(small_model, batch, atol=0.0)


def test_network_fits_a_logarithm():
    rng = np.random.default_rng(0)
    x_train, x_val = rng.uniform(0.1, 10.0, size=400), rng.uniform(0.1, 10.0, size=100)
    # training arrays hold ln x and ln lambda
    X_train, X_val = np.log(x_train)[:, None], np.log(x_val)[:, None]
    model = init_model([32], X_train.mean(axis=0), X_train.std(axis=0), seed=1)
    config = TrainConfig(epochs=200, batch_size=32, lr0=1e-2, log_every=0)
    _, history = train(
        model, (X_train, 2 * X_train[:, 0]), (X_val, 2 * X_val[:, 0]), config
    )
    assert history["val_loss"].min() < 1e-4


def test_training_keeps_the_best_checkpoint(small_model, training_arrays):
    train_arrays, val_arrays = training_arrays
    best, history = train(small_model, train_arrays, val_arrays, QUICK_TRAINING)
    pytest.assume(len(history) == 60)
    pytest.assume(history["val_loss"].min() < history["val_loss"].iloc[0])
    pytest.assume(history["best_val_loss"].is_monotonic_decreasing)
    Z_val = standardize(best, val_arrays[0])
    pytest.assume(mse(best, Z_val, val_arrays[1]) == history["val_loss"].min())


def test_training_is_reproducible(small_model, training_arrays):
    train_arrays, val_arrays = training_arrays
    _, first = train(small_model, train_arrays, val_arrays, QUICK_TRAINING)
    _, second = train(small_model, train_arrays, val_arrays, QUICK_TRAINING)
    np.testing.assert_array_equal(first.to_numpy(), second.to_numpy())


def test_training_does_not_modify_the_initial_model(small_model, training_arrays):
    before = small_model.layers[0][0].copy()
    train(small_model, *training_arrays, TrainConfig(epochs=2, log_every=0))
    np.testing.assert_array_equal(small_model.layers[0][0], before)


def test_divergence_is_reported(small_model, training_arrays):
    (X_train, y_train), val_arrays = training_arrays
    with pytest.raises(DivergedError) as info:
        train(small_model, (X_train, np.full_like(y_train, np.inf)), val_arrays)
    assert info.value.epoch == 0
