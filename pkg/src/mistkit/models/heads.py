"""Linear classification heads: activations, losses and their gradients.

Per-instance loss is binary cross-entropy summed over labels (sigmoid) or
cross-entropy (softmax); batch loss is the mean over instances. Both are
computed from logits in numerically stable form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class HeadConfig:
    dataset_id: str
    modal: Optional[str]  # None for a shared head
    label_order: tuple[str, ...]
    activation: str = "sigmoid"

    def __post_init__(self):
        if self.activation not in ("sigmoid", "softmax"):
            raise ValueError(f"unknown activation {self.activation!r}")


@dataclass
class LinearHead:
    config: HeadConfig
    weights: np.ndarray  # (L, D)
    bias: np.ndarray  # (L,)

    @property
    def input_dim(self) -> int:
        return self.weights.shape[1]


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    ez = np.exp(shifted)
    return ez / ez.sum(axis=-1, keepdims=True)


def init_head(config: HeadConfig, input_dim: int, rng: np.random.Generator) -> LinearHead:
    """Uniform(-a, a) with a = sqrt(6 / (fan_in + fan_out)); zero bias."""
    n_labels = len(config.label_order)
    bound = np.sqrt(6.0 / (input_dim + n_labels))
    weights = rng.uniform(-bound, bound, size=(n_labels, input_dim))
    return LinearHead(config=config, weights=weights, bias=np.zeros(n_labels))


def head_scores(head: LinearHead, x: np.ndarray) -> np.ndarray:
    """Activation outputs for one input vector."""
    if x.shape != (head.input_dim,):
        raise ValueError(
            f"head for {head.config.dataset_id}/{head.config.modal} expects input "
            f"dim {head.input_dim}, got {x.shape}"
        )
    z = head.weights @ x + head.bias
    return sigmoid(z) if head.config.activation == "sigmoid" else softmax(z)


def batch_logits(weights: np.ndarray, bias: np.ndarray, X: np.ndarray) -> np.ndarray:
    return X @ weights.T + bias


def bce_loss_and_dz(Z: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """Summed-over-labels BCE, averaged over the batch; dZ for backprop."""
    B = Z.shape[0]
    loss = np.maximum(Z, 0.0) - Z * Y + np.log1p(np.exp(-np.abs(Z)))
    dZ = (sigmoid(Z) - Y) / B
    return float(loss.sum() / B), dZ


def ce_loss_and_dz(Z: np.ndarray, Y: np.ndarray) -> tuple[float, np.ndarray]:
    """Cross-entropy against one-hot targets, averaged over the batch."""
    B = Z.shape[0]
    shifted = Z - Z.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -(Y * log_probs).sum() / B
    dZ = (softmax(Z) - Y) / B
    return float(loss), dZ


def head_loss_and_grads(
    weights: np.ndarray, bias: np.ndarray, X: np.ndarray, Y: np.ndarray, activation: str
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """(loss, dW, db, dX) over a batch of inputs X (B, D) and targets Y (B, L)."""
    Z = batch_logits(weights, bias, X)
    if activation == "sigmoid":
        loss, dZ = bce_loss_and_dz(Z, Y)
    else:
        loss, dZ = ce_loss_and_dz(Z, Y)
    dW = dZ.T @ X
    db = dZ.sum(axis=0)
    dX = dZ @ weights
    return loss, dW, db, dX
