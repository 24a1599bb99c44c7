"""Feed-forward ReLU network trained with mini-batch SGD."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import log_softmax, softmax

from .base import (argmax_first, check_predict_input, check_training_data, encode_labels,
                   pack_array, unpack_array)


@dataclass(frozen=True)
class StepSchedule:
    """Learning rate ``rate * factor ** (epoch // every)``."""
    rate: float = 0.01
    every: int = 50
    factor: float = 0.5
    momentum: float = 0.9

    def at(self, epoch: int) -> float:
        return self.rate * self.factor ** (epoch // self.every)


def _forward(weights, biases, X):
    acts = [X]
    h = X
    for W, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ W + b, 0.0)
        acts.append(h)
    return acts, acts[-1] @ weights[-1] + biases[-1]


def mlp_loss_grads(weights: Sequence[np.ndarray], biases: Sequence[np.ndarray], X: np.ndarray,
                   Y: np.ndarray, alpha: float = 0.0):
    """Mean cross-entropy (+ ``alpha / 2`` times squared weight norms) and its gradients.

    ``weights[l]`` has shape (fan_in, fan_out); ``Y`` is one-hot.  Returns
    ``(loss, weight_grads, bias_grads)``.
    """
    n = X.shape[0]
    acts, logits = _forward(weights, biases, X)
    logp = log_softmax(logits, axis=1)
    loss = -np.sum(Y * logp) / n + 0.5 * alpha * sum(np.sum(W * W) for W in weights)
    delta = (np.exp(logp) - Y) / n
    gw, gb = [None] * len(weights), [None] * len(weights)
    for layer in range(len(weights) - 1, -1, -1):
        gw[layer] = acts[layer].T @ delta + alpha * weights[layer]
        gb[layer] = delta.sum(axis=0)
        if layer:
            delta = (delta @ weights[layer].T) * (acts[layer] > 0)
    return float(loss), gw, gb


@dataclass
class MlpModel:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    label_order: tuple[str, ...]
    hyper: dict
    manifest_fingerprint: str | None = None

    kind = "mlp"

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    @property
    def n_features(self) -> int:
        return int(self.weights[0].shape[0])

    def decision_function(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        return _forward(self.weights, self.biases, X)[1]

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X), axis=1)

    def predict_codes(self, X) -> np.ndarray:
        return argmax_first(self.decision_function(X))

    def predict(self, X) -> list[str]:
        return [self.label_order[i] for i in self.predict_codes(X)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyper": self.hyper, "label_order": list(self.label_order),
                "manifest_fingerprint": self.manifest_fingerprint,
                "weights": [pack_array(W) for W in self.weights],
                "biases": [pack_array(b) for b in self.biases]}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        return cls([unpack_array(w) for w in d["weights"]], [unpack_array(b) for b in d["biases"]],
                   tuple(d["label_order"]), d["hyper"], d.get("manifest_fingerprint"))


def init_weights(layer_sizes: Sequence[int], rng: np.random.Generator):
    """Uniform on +-sqrt(6 / fan_in); zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def fit_mlp(X, y, hidden: Sequence[int] = (300, 150), epochs: int = 200,
            schedule: StepSchedule = StepSchedule(), batch_size: int = 64, alpha: float = 1e-4,
            seed: int = 0, label_order: Sequence[str] | None = None) -> MlpModel:
    X = check_training_data(X, y)
    codes, order = encode_labels(y, label_order)
    if np.unique(codes).size < 2:
        raise ValueError("need at least two classes")
    if epochs < 0 or batch_size < 1:
        raise ValueError("epochs must be >= 0 and batch_size >= 1")
    n = X.shape[0]
    sizes = [X.shape[1], *map(int, hidden), len(order)]
    rng = np.random.default_rng(seed)
    weights, biases = init_weights(sizes, rng)
    vel_w = [np.zeros_like(W) for W in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    Y = np.zeros((n, len(order)))
    Y[np.arange(n), codes] = 1.0

    for epoch in range(epochs):
        lr = schedule.at(epoch)
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = perm[start:start + batch_size]
            _, gw, gb = mlp_loss_grads(weights, biases, X[rows], Y[rows], alpha)
            for layer in range(len(weights)):
                vel_w[layer] = schedule.momentum * vel_w[layer] - lr * gw[layer]
                vel_b[layer] = schedule.momentum * vel_b[layer] - lr * gb[layer]
                weights[layer] += vel_w[layer]
                biases[layer] += vel_b[layer]

    hyper = {"hidden": list(map(int, hidden)), "epochs": epochs, "batch_size": batch_size,
             "alpha": alpha, "seed": seed, "rate": schedule.rate, "every": schedule.every,
             "factor": schedule.factor, "momentum": schedule.momentum}
    return MlpModel(weights, biases, order, hyper)
