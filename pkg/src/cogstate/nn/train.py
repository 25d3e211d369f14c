"""Mini-batch training loop with deterministic shuffle and dropout streams."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, TrainingDivergenceError
from .losses import cce_loss
from .model import Sequential
from .optim import Adam


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 10
    epochs: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    shuffle: bool = True


@dataclass
class TrainResult:
    curves: list[dict]
    final_train_loss: float
    final_train_acc: float


def predict_probs(model: Sequential, x: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Inference-mode class probabilities, batched to bound memory."""
    chunks = [
        model.forward(x[i : i + batch_size], training=False)
        for i in range(0, x.shape[0], batch_size)
    ]
    return np.concatenate(chunks, axis=0)


def accuracy_of(probs: np.ndarray, labels: np.ndarray) -> float:
    return float((probs.argmax(axis=1) == labels).mean())


def train(
    model: Sequential,
    x: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    val_x: np.ndarray | None = None,
    val_y: np.ndarray | None = None,
) -> TrainResult:
    """Train with Adam and per-epoch loss/accuracy curves.

    Deterministic given ``config.seed``: the shuffle order and dropout
    masks come from fixed derived streams. A non-finite loss aborts with
    a diagnostic.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    if x.shape[0] == 0:
        raise ConfigError("empty training set")
    if y.shape != (x.shape[0],):
        raise ConfigError(f"labels shape {y.shape} does not match {x.shape[0]} samples")
    if config.batch_size < 1 or config.epochs < 0:
        raise ConfigError("batch_size must be >= 1 and epochs >= 0")

    shuffle_rng = np.random.default_rng([config.seed, 101])
    dropout_rng = np.random.default_rng([config.seed, 202])
    opt = Adam(model.params(), lr=config.learning_rate,
               betas=(config.beta1, config.beta2), eps=config.eps)

    curves: list[dict] = []
    n = x.shape[0]
    last_loss, last_acc = float("nan"), float("nan")
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(n) if config.shuffle else np.arange(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = x[idx], y[idx]
            model.zero_grads()
            probs = model.forward(xb, training=True, rng=dropout_rng)
            loss, dlogits = cce_loss(probs, yb)
            if not np.isfinite(loss):
                raise TrainingDivergenceError(
                    f"non-finite loss at epoch {epoch}, batch starting at {start}"
                )
            model.backward_from_logits(dlogits)
            opt.step(model.grads())
            epoch_loss += loss * len(idx)
            epoch_correct += int((probs.argmax(axis=1) == yb).sum())
        last_loss = epoch_loss / n
        last_acc = epoch_correct / n
        row = {
            "epoch": epoch,
            "train_loss": last_loss,
            "train_acc": last_acc,
            "val_loss": None,
            "val_acc": None,
        }
        if val_x is not None and val_y is not None:
            val_probs = predict_probs(model, val_x)
            val_loss, _ = cce_loss(val_probs, val_y)
            row["val_loss"] = val_loss
            row["val_acc"] = accuracy_of(val_probs, val_y)
        curves.append(row)
    return TrainResult(curves=curves, final_train_loss=last_loss, final_train_acc=last_acc)
