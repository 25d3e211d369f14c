"""Categorical cross-entropy, fused with softmax for the backward pass."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError


def cce_loss(probs: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood and its gradient w.r.t. the logits.

    ``probs`` must be softmax output (rows summing to 1); the returned
    gradient ``(probs - onehot) / B`` is exact under that fusion.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2:
        raise ConfigError(f"probs must be (B, K), got {probs.shape}")
    b, k = probs.shape
    if labels.shape != (b,):
        raise ConfigError(f"labels shape {labels.shape} does not match batch {b}")
    if labels.min() < 0 or labels.max() >= k:
        raise ConfigError(f"labels must be in [0, {k - 1}]")
    if np.max(np.abs(probs.sum(axis=1) - 1.0)) > 1e-8:
        raise ConfigError("probability rows do not sum to 1; pass softmax output")
    picked = probs[np.arange(b), labels]
    with np.errstate(divide="ignore"):
        # log(0) -> -inf is deliberately left to the divergence detector
        loss = float(-np.log(picked).mean())
    grad = probs.copy()
    grad[np.arange(b), labels] -= 1.0
    return loss, grad / b
