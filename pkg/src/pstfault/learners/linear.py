"""Multinomial logistic regression with an L2 penalty."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.special import log_softmax, softmax

from .base import (argmax_first, check_predict_input, check_training_data, encode_labels,
                   pack_array, unpack_array)


def logistic_loss_grad(theta: np.ndarray, X: np.ndarray, Y: np.ndarray,
                       l2_strength: float) -> tuple[float, np.ndarray]:
    """Mean cross-entropy plus ``l2_strength / 2 * ||W||^2`` (bias unpenalized).

    ``theta`` packs ``W`` (classes x features, row-major) followed by the bias;
    ``Y`` is one-hot.
    """
    n, d = X.shape
    c = Y.shape[1]
    W = theta[: c * d].reshape(c, d)
    b = theta[c * d:]
    logits = X @ W.T + b
    logp = log_softmax(logits, axis=1)
    loss = -np.sum(Y * logp) / n + 0.5 * l2_strength * np.sum(W * W)
    delta = (np.exp(logp) - Y) / n
    grad_w = delta.T @ X + l2_strength * W
    grad_b = delta.sum(axis=0)
    return float(loss), np.concatenate([grad_w.ravel(), grad_b])


@dataclass
class LinearModel:
    weights: np.ndarray  # (classes, features)
    bias: np.ndarray
    l2_strength: float
    label_order: tuple[str, ...]
    iterations: int = 0
    manifest_fingerprint: str | None = None

    kind = "linear"

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[1])

    def decision_function(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        return X @ self.weights.T + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.decision_function(X), axis=1)

    def predict_codes(self, X) -> np.ndarray:
        return argmax_first(self.decision_function(X))

    def predict(self, X) -> list[str]:
        return [self.label_order[i] for i in self.predict_codes(X)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyper": {"l2_strength": self.l2_strength},
                "label_order": list(self.label_order), "iterations": self.iterations,
                "manifest_fingerprint": self.manifest_fingerprint,
                "weights": pack_array(self.weights), "bias": pack_array(self.bias)}

    @classmethod
    def from_dict(cls, d: dict) -> "LinearModel":
        return cls(unpack_array(d["weights"]), unpack_array(d["bias"]), d["hyper"]["l2_strength"],
                   tuple(d["label_order"]), d.get("iterations", 0), d.get("manifest_fingerprint"))


def fit_logistic(X, y, l2_strength: float = 1e-4, max_iter: int = 500, tol: float = 1e-5,
                 label_order: Sequence[str] | None = None) -> LinearModel:
    """L-BFGS fit from zero weights; stops at gradient norm ``tol`` or ``max_iter``."""
    X = check_training_data(X, y)
    codes, order = encode_labels(y, label_order)
    if np.unique(codes).size < 2:
        raise ValueError("need at least two classes")
    if l2_strength < 0:
        raise ValueError("l2_strength must be non-negative")
    c, d = len(order), X.shape[1]
    Y = np.zeros((X.shape[0], c))
    Y[np.arange(X.shape[0]), codes] = 1.0
    res = minimize(logistic_loss_grad, np.zeros(c * d + c), args=(X, Y, l2_strength),
                   jac=True, method="L-BFGS-B",
                   options={"maxiter": max_iter, "gtol": tol, "ftol": 0.0})
    theta = res.x
    return LinearModel(theta[: c * d].reshape(c, d).copy(), theta[c * d:].copy(),
                       float(l2_strength), order, int(res.nit))
