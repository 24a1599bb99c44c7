"""One-vs-rest RBF support vector machine trained by kernelized Pegasos."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .base import (argmax_first, check_predict_input, check_training_data, encode_labels,
                   pack_array, unpack_array)


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    """K[i, j] = exp(-gamma * ||A[i] - B[j]||^2)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    K = A @ B.T
    K *= -2.0
    K += np.einsum("ij,ij->i", A, A)[:, None]
    K += np.einsum("ij,ij->i", B, B)[None, :]
    np.maximum(K, 0.0, out=K)
    K *= -gamma
    np.exp(K, out=K)
    return K


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, features)
    dual_coef: np.ndarray        # (n_sv, classes)
    gamma: float
    label_order: tuple[str, ...]
    hyper: dict
    manifest_fingerprint: str | None = None

    kind = "svm"

    @property
    def n_features(self) -> int:
        return int(self.support_vectors.shape[1])

    def decision_function(self, X, chunk: int = 2048) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        out = np.empty((X.shape[0], len(self.label_order)))
        for a in range(0, X.shape[0], chunk):
            out[a:a + chunk] = rbf_kernel(X[a:a + chunk], self.support_vectors, self.gamma) @ self.dual_coef
        return out

    def predict_codes(self, X) -> np.ndarray:
        return argmax_first(self.decision_function(X))

    def predict(self, X) -> list[str]:
        return [self.label_order[i] for i in self.predict_codes(X)]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyper": self.hyper, "gamma": self.gamma,
                "label_order": list(self.label_order),
                "manifest_fingerprint": self.manifest_fingerprint,
                "support_vectors": pack_array(self.support_vectors),
                "dual_coef": pack_array(self.dual_coef)}

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(unpack_array(d["support_vectors"]), unpack_array(d["dual_coef"]), d["gamma"],
                   tuple(d["label_order"]), d["hyper"], d.get("manifest_fingerprint"))


def fit_svm(X, y, gamma: float = 0.001, regularization: float = 1e-4, epochs: int = 10,
            batch_size: int = 64, seed: int = 0,
            label_order: Sequence[str] | None = None) -> SvmModel:
    """Mini-batch kernel Pegasos on the hinge loss, one binary problem per class.

    ``regularization`` is the Pegasos lambda.  After ``T`` steps the decision
    value of class ``c`` is ``sum_j a[j, c] y[j, c] K(x_j, x) / (lambda T)``,
    where ``a`` accumulates each margin violation weighted by one over its
    batch size.
    """
    X = check_training_data(X, y)
    codes, order = encode_labels(y, label_order)
    if np.unique(codes).size < 2:
        raise ValueError("need at least two classes")
    if gamma < 0 or regularization <= 0 or epochs < 1:
        raise ValueError("need gamma >= 0, regularization > 0 and epochs >= 1")
    n, c = X.shape[0], len(order)
    K = rbf_kernel(X, X, gamma)
    signs = -np.ones((n, c))
    signs[np.arange(n), codes] = 1.0
    acc = np.zeros((n, c))
    rng = np.random.default_rng(seed)
    t = 0
    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, batch_size):
            rows = perm[start:start + batch_size]
            if t == 0:
                margins = np.zeros((rows.size, c))
            else:
                margins = signs[rows] * (K[rows] @ (acc * signs)) / (regularization * t)
            acc[rows] += (margins < 1.0) / rows.size
            t += 1
    coef = acc * signs / (regularization * t)
    support = np.flatnonzero(acc.any(axis=1))
    hyper = {"gamma": gamma, "regularization": regularization, "epochs": epochs,
             "batch_size": batch_size, "seed": seed}
    return SvmModel(X[support].copy(), coef[support].copy(), float(gamma), order, hyper)
