"""Shared helpers: label coding, array serialization, input checks."""

from __future__ import annotations

import base64
from typing import Sequence

import numpy as np


def encode_labels(y, label_order: Sequence[str] | None = None) -> tuple[np.ndarray, tuple[str, ...]]:
    """Map labels to indices of ``label_order`` (sorted unique labels by default)."""
    names = [str(v) for v in y]
    if label_order is None:
        label_order = sorted(set(names))
    order = tuple(str(v) for v in label_order)
    lookup = {name: i for i, name in enumerate(order)}
    if len(lookup) != len(order):
        raise ValueError("label_order contains duplicates")
    try:
        codes = np.array([lookup[name] for name in names], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} missing from label_order") from None
    return codes, order


def check_training_data(X, y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("X must be a non-empty 2-D array")
    if len(y) != X.shape[0]:
        raise ValueError("X and y differ in length")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    return X


def check_predict_input(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got shape {X.shape}")
    return X


def argmax_first(scores: np.ndarray) -> np.ndarray:
    """Row-wise argmax; ties go to the lowest index, i.e. earliest in label_order."""
    return np.argmax(scores, axis=1)


def pack_array(a: np.ndarray) -> dict:
    """Exact, compact JSON form of a numeric array (little-endian base64)."""
    a = np.ascontiguousarray(a)
    dtype = a.dtype.newbyteorder("<")
    return {"dtype": dtype.str, "shape": list(a.shape),
            "data": base64.b64encode(a.astype(dtype).tobytes()).decode("ascii")}


def unpack_array(d: dict) -> np.ndarray:
    raw = base64.b64decode(d["data"])
    return np.frombuffer(raw, dtype=np.dtype(d["dtype"])).reshape(d["shape"]).copy()
