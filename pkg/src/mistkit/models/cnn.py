"""Convolutional sentence encoder: 1-D convolutions over token windows with
region sizes 3/4/5 (100 filters each), ReLU, and max-over-time pooling into
a 300-dimensional sentence vector.

Forward passes cache window matrices and pooling argmaxes so the backward
pass can route gradients exactly; gradients for filters, biases and (when
the embedding table is trainable) input rows are all analytic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

REGION_SIZES = (3, 4, 5)
N_FILTERS = 100
OUTPUT_DIM = N_FILTERS * len(REGION_SIZES)


@dataclass
class CnnEncoder:
    embed_dim: int
    dropout_p: float = 0.1
    filters: dict[int, np.ndarray] = field(default_factory=dict)  # size -> (F, size*dim)
    biases: dict[int, np.ndarray] = field(default_factory=dict)  # size -> (F,)

    def params(self) -> dict[str, np.ndarray]:
        out = {}
        for size in REGION_SIZES:
            out[f"conv{size}_w"] = self.filters[size]
            out[f"conv{size}_b"] = self.biases[size]
        return out


def init_encoder(embed_dim: int, dropout_p: float, rng: np.random.Generator) -> CnnEncoder:
    encoder = CnnEncoder(embed_dim=embed_dim, dropout_p=dropout_p)
    for size in REGION_SIZES:
        fan_in = size * embed_dim
        bound = np.sqrt(6.0 / (fan_in + N_FILTERS))
        encoder.filters[size] = rng.uniform(-bound, bound, size=(N_FILTERS, fan_in))
        encoder.biases[size] = np.zeros(N_FILTERS)
    return encoder


def pad_embeddings(X: np.ndarray) -> np.ndarray:
    """Zero-pad a (T, dim) matrix so every region size has a window."""
    if X.shape[0] >= max(REGION_SIZES):
        return X
    pad = np.zeros((max(REGION_SIZES) - X.shape[0], X.shape[1]))
    return np.vstack([X, pad])


def _windows(X: np.ndarray, size: int) -> np.ndarray:
    T = X.shape[0]
    n = T - size + 1
    return np.stack([X[t : t + size].reshape(-1) for t in range(n)])


def encode(encoder: CnnEncoder, X: np.ndarray, want_cache: bool = False):
    """Encode padded embeddings (T, dim) into a 300-vector; optional cache."""
    X = pad_embeddings(np.asarray(X, dtype=np.float64))
    pooled_parts = []
    cache = {"X_shape": X.shape, "per_size": {}}
    for size in REGION_SIZES:
        windows = _windows(X, size)
        acts = windows @ encoder.filters[size].T + encoder.biases[size]
        relu = np.maximum(acts, 0.0)
        argmax = relu.argmax(axis=0)
        pooled = relu[argmax, np.arange(N_FILTERS)]
        pooled_parts.append(pooled)
        if want_cache:
            cache["per_size"][size] = (windows, argmax, pooled > 0.0)
    out = np.concatenate(pooled_parts)
    return (out, cache) if want_cache else out


def backward(
    encoder: CnnEncoder, cache: dict, d_out: np.ndarray, want_dx: bool = False
) -> tuple[dict[str, np.ndarray], np.ndarray | None]:
    """Gradients of the loss w.r.t. encoder params (and optionally inputs)."""
    grads: dict[str, np.ndarray] = {}
    dX = np.zeros(cache["X_shape"]) if want_dx else None
    dim = cache["X_shape"][1]
    for i, size in enumerate(REGION_SIZES):
        windows, argmax, active = cache["per_size"][size]
        d_pooled = d_out[i * N_FILTERS : (i + 1) * N_FILTERS] * active
        best = windows[argmax]  # (F, size*dim)
        grads[f"conv{size}_w"] = d_pooled[:, None] * best
        grads[f"conv{size}_b"] = d_pooled.copy()
        if want_dx:
            d_windows = np.zeros_like(windows)
            np.add.at(d_windows, argmax, d_pooled[:, None] * encoder.filters[size])
            for j in range(size):
                dX[j : j + windows.shape[0]] += d_windows[:, j * dim : (j + 1) * dim]
    return grads, dX


def accumulate(into: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
    for name, grad in grads.items():
        if name in into:
            into[name] += grad
        else:
            into[name] = grad.copy()
