"""Train/test splitting, classification metrics and hyperparameter sweeps."""

from __future__ import annotations

import csv
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .learners import Variant, fit_ensemble


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 2.0 / 3.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train_fraction must lie in (0, 1)")

    def train_count(self, n: int) -> int:
        # the small epsilon keeps 960 * 2/3 from rounding down to 639
        return int(np.floor(n * self.train_fraction + 1e-9))


def stratified_split(labels: Sequence, spec: SplitSpec = SplitSpec()) -> tuple[np.ndarray, np.ndarray]:
    """Per-class seeded shuffle; returns sorted train and test row indices."""
    names = np.array([str(v) for v in labels])
    if names.size == 0:
        raise ValueError("no records to split")
    rng = np.random.default_rng(spec.seed)
    train, test = [], []
    for label in sorted(set(names.tolist())):
        rows = np.flatnonzero(names == label)
        k = spec.train_count(rows.size)
        if rows.size < 2 or k == 0 or k == rows.size:
            raise ValueError(f"class {label!r} with {rows.size} records is too small to split")
        rows = rows[rng.permutation(rows.size)]
        train.append(rows[:k])
        test.append(rows[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def _check_pair(predictions, truths) -> tuple[list[str], list[str]]:
    p = [str(v) for v in predictions]
    t = [str(v) for v in truths]
    if len(p) != len(t):
        raise ValueError(f"length mismatch: {len(p)} predictions vs {len(t)} truths")
    if not t:
        raise ValueError("need at least one prediction")
    return p, t


def misclassification_table(predictions, truths) -> list[tuple[str, str, int]]:
    """(actual, predicted, count) for every confusion, most frequent first."""
    p, t = _check_pair(predictions, truths)
    pairs = Counter((a, b) for a, b in zip(t, p) if a != b)
    return sorted(((a, b, n) for (a, b), n in pairs.items()), key=lambda r: (-r[2], r[0], r[1]))


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class EvalReport:
    accuracy: float
    per_class: dict[str, ClassScores]
    confusions: list[tuple[str, str, int]]
    n_samples: int
    hyper: dict = field(default_factory=dict)
    classifier: str = ""

    @property
    def n_errors(self) -> int:
        return sum(n for _, _, n in self.confusions)

    def to_dict(self) -> dict:
        return {
            "classifier": self.classifier, "accuracy": self.accuracy, "n_samples": self.n_samples,
            "n_errors": self.n_errors, "hyper": self.hyper,
            "per_class": {k: vars(v) for k, v in self.per_class.items()},
            "misclassifications": [{"actual": a, "predicted": b, "count": n}
                                   for a, b, n in self.confusions],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(d["accuracy"], {k: ClassScores(**v) for k, v in d["per_class"].items()},
                   [(m["actual"], m["predicted"], m["count"]) for m in d["misclassifications"]],
                   d["n_samples"], d.get("hyper", {}), d.get("classifier", ""))

    def save(self, json_path: str | Path, csv_path: str | Path | None = None) -> None:
        Path(json_path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        if csv_path is not None:
            write_misclassification_csv(csv_path, self.confusions)


def write_misclassification_csv(path: str | Path, table) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["actual", "predicted", "count"])
        w.writerows(table)


def score(predictions, truths, hyper: dict | None = None, classifier: str = "") -> EvalReport:
    """Accuracy plus per-class precision, recall and F1.

    Precision is 0 for a class never predicted; F1 is 0 when precision and
    recall are both 0.  Classes are those seen in either sequence.
    """
    p, t = _check_pair(predictions, truths)
    tp, pred_n, true_n = Counter(), Counter(p), Counter(t)
    for a, b in zip(t, p):
        if a == b:
            tp[a] += 1
    per_class = {}
    for label in sorted(set(p) | set(t)):
        prec = tp[label] / pred_n[label] if pred_n[label] else 0.0
        rec = tp[label] / true_n[label] if true_n[label] else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
        per_class[label] = ClassScores(prec, rec, f1, true_n[label])
    accuracy = sum(tp.values()) / len(t)
    return EvalReport(accuracy, per_class, misclassification_table(p, t), len(t),
                      dict(hyper or {}), classifier)


DEFAULT_ERT_GRID = {
    "n_estimators": list(range(40, 401, 40)),
    "max_features": [0.1, 0.2, 0.3, 0.4, 0.5],
    "max_depth": [10, 20, 30, 40],
}


@dataclass
class GridResult:
    best: dict
    best_accuracy: float
    cells: list[dict]

    def to_dict(self) -> dict:
        return {"best": self.best, "best_accuracy": self.best_accuracy, "cells": self.cells}


def _cell_key(cell: dict):
    depth = cell["max_depth"] if cell["max_depth"] is not None else float("inf")
    return (-cell["accuracy"], cell["n_estimators"], depth, cell["max_features"])


def grid_search(train: tuple, test: tuple, variant: Variant | str, grid: dict | None = None,
                seed: int = 0, jobs: int = 1, label_order: Sequence[str] | None = None) -> GridResult:
    """Score every grid cell on ``test`` and return the best one.

    Trees are seeded per index, so the forest with ``k`` trees is the first
    ``k`` trees of a larger forest; each (max_features, max_depth) pair is fit
    once with the largest tree count.  Ties prefer fewer trees, then
    shallower depth, then a smaller feature fraction.
    """
    grid = dict(DEFAULT_ERT_GRID if grid is None else grid)
    sizes = sorted(set(int(v) for v in grid["n_estimators"]))
    if not sizes or not grid["max_features"] or not grid["max_depth"]:
        raise ValueError("grid must not be empty")
    X_tr, y_tr = train
    X_te, y_te = test
    truths = [str(v) for v in y_te]
    cells = []
    for mf, depth in itertools.product(grid["max_features"], grid["max_depth"]):
        forest = fit_ensemble(X_tr, y_tr, variant, sizes[-1], mf, depth, seed, jobs, label_order)
        for k in sizes:
            pred = forest.prefix(k).predict(X_te)
            acc = float(np.mean([a == b for a, b in zip(pred, truths)]))
            cells.append({"n_estimators": k, "max_features": mf, "max_depth": depth, "accuracy": acc})
    best = min(cells, key=_cell_key)
    return GridResult({k: best[k] for k in ("n_estimators", "max_features", "max_depth")},
                      best["accuracy"], cells)
