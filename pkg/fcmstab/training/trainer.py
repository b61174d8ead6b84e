"""
Mini-batch Adam training of the surrogate network on the MSE of ln(lambda).
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from fcmstab.artifacts.model.mlp_model import MlpModel
from fcmstab.utils import global_logger
from fcmstab.utils.common import DivergedError, ValidationError

Arrays = Tuple[np.ndarray, np.ndarray]


@dataclass
class TrainConfig:
    """Training settings

    Parameters
    ----------
    epochs : int
        Number of passes over the training set, by default 2000
    batch_size : int, optional
        By default min(|train| / 4, 65536)
    lr0 : float
        Initial learning rate, by default 5e-4
    lr_halving_period : int, optional
        Epochs between learning-rate halvings, by default epochs / halving_divisor
    halving_divisor : int
        4 for the final schedule, 8 for the search schedule
    beta1, beta2, eps : float
        Adam constants
    seed : int
        Seed of the per-epoch shuffling
    log_every : int
        Epochs between progress messages
    """

    epochs: int = 2000
    batch_size: Optional[int] = None
    lr0: float = 5e-4
    lr_halving_period: Optional[int] = None
    halving_divisor: int = 4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    log_every: int = 100

    def __post_init__(self):
        if self.epochs < 1:
            raise ValidationError("epochs must be at least 1")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValidationError("batch_size must be at least 1")
        if not self.lr0 > 0:
            raise ValidationError("lr0 must be positive")
        if self.lr_halving_period is None:
            self.lr_halving_period = max(1, self.epochs // self.halving_divisor)
        if self.lr_halving_period < 1:
            raise ValidationError("lr_halving_period must be at least 1")

    def resolve_batch_size(self, n_train: int) -> int:
        if self.batch_size is not None:
            return self.batch_size
        return max(1, min(n_train // 4, 65536))


def learning_rate(epoch: int, cfg: TrainConfig) -> float:
    """Exponential step decay, lr0 * (1/2)^floor(epoch / period)

    >>> learning_rate(500, TrainConfig(epochs=2000))
    0.00025
    """
    return cfg.lr0 * 0.5 ** (epoch // cfg.lr_halving_period)


def standardize(model: MlpModel, X_log) -> np.ndarray:
    return (np.asarray(X_log, dtype=float) - model.norm_mean) / model.norm_std


def mse(model: MlpModel, Z, y) -> float:
    residual = model.predict_log(Z) - np.ravel(y)
    return float(np.mean(residual**2))


def loss_and_gradients(model: MlpModel, Z, y):
    """MSE loss and its gradient with respect to every (W, b) by backpropagation"""
    y = np.ravel(y)
    pre = model.activations(Z)
    inputs = [Z] + [np.maximum(a, 0.0) for a in pre[:-1]]
    residual = pre[-1][:, 0] - y
    loss = float(np.mean(residual**2))
    delta = (2.0 / len(y)) * residual[:, None]
    grads = [None] * len(model.layers)
    for k in range(len(model.layers) - 1, -1, -1):
        W, _ = model.layers[k]
        grads[k] = (inputs[k].T @ delta, delta.sum(axis=0))
        if k > 0:
            delta = (delta @ W.T) * (pre[k - 1] > 0)
    return loss, grads


class Adam:
    def __init__(self, model: MlpModel, cfg: TrainConfig):
        self.cfg = cfg
        self.step_count = 0
        self.m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in model.layers]
        self.v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in model.layers]

    def step(self, model: MlpModel, grads, lr: float):
        cfg = self.cfg
        self.step_count += 1
        c1 = 1 - cfg.beta1**self.step_count
        c2 = 1 - cfg.beta2**self.step_count
        for k, (param, grad) in enumerate(zip(model.layers, grads)):
            for j in range(2):
                m, v = self.m[k][j], self.v[k][j]
                m *= cfg.beta1
                m += (1 - cfg.beta1) * grad[j]
                v *= cfg.beta2
                v += (1 - cfg.beta2) * grad[j] ** 2
                weights = param[j]
                weights -= lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)


def train(
    model: MlpModel, train_arrays: Arrays, val_arrays: Arrays, cfg: TrainConfig = None
):
    """Train a copy of `model` and return the best-validation checkpoint.

    Parameters
    ----------
    model : MlpModel
        Initial network; its normalization statistics are already set
    train_arrays, val_arrays : tuple
        (ln X, ln lambda) arrays, as returned by `to_training_arrays`
    cfg : TrainConfig, optional

    Returns
    -------
    tuple
        (best model, history DataFrame with epoch, lr, train_loss, val_loss and
        best_val_loss columns)

    Raises
    ------
    DivergedError
        If a loss becomes non-finite
    """
    cfg = cfg or TrainConfig()
    model = model.copy()
    Z_train, y_train = standardize(model, train_arrays[0]), np.ravel(train_arrays[1])
    Z_val, y_val = standardize(model, val_arrays[0]), np.ravel(val_arrays[1])
    n = len(y_train)
    if n == 0 or len(y_val) == 0:
        raise ValidationError("Training and validation sets must not be empty")
    batch_size = cfg.resolve_batch_size(n)
    rng = np.random.default_rng(cfg.seed)
    optimizer = Adam(model, cfg)

    best, best_loss = model.copy(), np.inf
    rows = []
    for epoch in range(cfg.epochs):
        lr = learning_rate(epoch, cfg)
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start : start + batch_size]
            loss, grads = loss_and_gradients(model, Z_train[idx], y_train[idx])
            if not np.isfinite(loss):
                raise DivergedError(epoch, loss)
            optimizer.step(model, grads, lr)
            total += loss * len(idx)
        val_loss = mse(model, Z_val, y_val)
        if not np.isfinite(val_loss):
            raise DivergedError(epoch, val_loss)
        if val_loss < best_loss:
            best, best_loss = model.copy(), val_loss
        rows.append((epoch, lr, total / n, val_loss, best_loss))
        if cfg.log_every and (epoch + 1) % cfg.log_every == 0:
            global_logger.info(
                "epoch %d: train %.4e, val %.4e, best %.4e, lr %.2e",
                epoch + 1,
                total / n,
                val_loss,
                best_loss,
                lr,
            )
    history = pd.DataFrame(
        rows, columns=["epoch", "lr", "train_loss", "val_loss", "best_val_loss"]
    )
    history.name = "training_history"
    return best, history


def avoid_kinks(model: MlpModel, Z, margin: float = 1e-3) -> MlpModel:
    """Copy of `model` with hidden biases shifted so no pre-activation of the
    batch lies within `margin` of the rectifier kink"""
    model = model.copy()
    h = Z
    for W, b in model.layers[:-1]:
        a = h @ W + b
        close = (np.abs(a) < margin).any(axis=0)
        shift = np.where(close, 2 * margin - a.min(axis=0), 0.0)
        b += shift
        h = np.maximum(h @ W + b, 0.0)
    return model


def gradient_check(
    model: MlpModel, batch: Arrays, step: float = 1e-6, atol: float = 1e-2
) -> float:
    """Largest deviation between backpropagated and central finite-difference
    gradients over every parameter.

    The deviation of one parameter is |g_a - g_n| / max(|g_a|, |g_n|, atol):
    relative for gradients above `atol`, absolute in units of `atol` below it.
    The rounding noise of the central difference, about 1e-16 * loss / step,
    must stay well under `atol` times the accepted deviation.

    Parameters
    ----------
    step : float
        Finite-difference step
    atol : float
        Gradient magnitude below which deviations are measured absolutely
    """
    if not atol > 0:
        raise ValidationError(f"atol must be positive, got {atol}")
    Z = standardize(model, batch[0])
    y = np.ravel(batch[1])
    model = avoid_kinks(model, Z)
    _, grads = loss_and_gradients(model, Z, y)
    worst = 0.0
    for k, (W, b) in enumerate(model.layers):
        for j, param in enumerate((W, b)):
            analytic = grads[k][j]
            flat = param.reshape(-1)
            for i in range(flat.size):
                saved = flat[i]
                flat[i] = saved + step
                plus = mse(model, Z, y)
                flat[i] = saved - step
                minus = mse(model, Z, y)
                flat[i] = saved
                numeric = (plus - minus) / (2 * step)
                a = analytic.reshape(-1)[i]
                deviation = abs(a - numeric) / max(abs(a), abs(numeric), atol)
                worst = max(worst, deviation)
    return worst
