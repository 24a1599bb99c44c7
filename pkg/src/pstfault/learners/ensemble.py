"""Randomized tree ensembles (extremely randomized trees and random forests)."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .base import (argmax_first, check_predict_input, check_training_data, encode_labels,
                   pack_array, unpack_array)
from .tree import Tree, Variant, _forest_proba, fit_tree

_TREE_ARRAYS = ("feature", "threshold", "left", "right", "leaf_ptr", "leaf_class", "leaf_count")


def tree_seeds(seed: int, index: int) -> tuple[int, np.random.Generator]:
    """Split-search seed and bootstrap generator for tree ``index``."""
    ss = np.random.SeedSequence([int(seed), int(index)])
    return int(ss.generate_state(1)[0]), np.random.default_rng(ss)


@dataclass
class EnsembleModel:
    trees: list[Tree]
    variant: Variant
    n_estimators: int
    max_features: float
    max_depth: int | None
    label_order: tuple[str, ...]
    n_features: int
    seed: int = 0
    manifest_fingerprint: str | None = None
    _packed: tuple | None = field(default=None, repr=False, compare=False)

    kind = "ensemble"

    @property
    def hyper(self) -> dict:
        return {"n_estimators": self.n_estimators, "max_features": self.max_features,
                "max_depth": self.max_depth}

    def _concat(self):
        if self._packed is None:
            sizes = np.array([t.n_nodes for t in self.trees], dtype=np.int64)
            offsets = np.concatenate([[0], np.cumsum(sizes)])
            leaf_sizes = np.array([t.leaf_class.size for t in self.trees], dtype=np.int64)
            leaf_off = np.concatenate([[0], np.cumsum(leaf_sizes)])
            ptr = np.concatenate([t.leaf_ptr[:-1] + leaf_off[i] for i, t in enumerate(self.trees)]
                                 + [[leaf_off[-1]]]).astype(np.int64)
            self._packed = (
                offsets,
                np.concatenate([t.feature for t in self.trees]),
                np.concatenate([t.threshold for t in self.trees]),
                np.concatenate([t.left for t in self.trees]),
                np.concatenate([t.right for t in self.trees]),
                ptr,
                np.concatenate([t.leaf_class for t in self.trees]),
                np.concatenate([t.leaf_count for t in self.trees]),
            )
        return self._packed

    def predict_proba(self, X) -> np.ndarray:
        X = check_predict_input(X, self.n_features)
        return _forest_proba(X, *self._concat(), len(self.label_order))

    def predict_codes(self, X) -> np.ndarray:
        return argmax_first(self.predict_proba(X))

    def predict(self, X) -> list[str]:
        return [self.label_order[i] for i in self.predict_codes(X)]

    def prefix(self, n_trees: int) -> "EnsembleModel":
        """The ensemble of the first ``n_trees`` trees; equals a fit with that many trees."""
        if not 1 <= n_trees <= len(self.trees):
            raise ValueError("n_trees out of range")
        return replace(self, trees=self.trees[:n_trees], n_estimators=n_trees, _packed=None)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "variant": self.variant.value, "hyper": self.hyper,
            "seed": self.seed, "label_order": list(self.label_order),
            "n_features": self.n_features, "manifest_fingerprint": self.manifest_fingerprint,
            "trees": [{name: pack_array(getattr(t, name)) for name in _TREE_ARRAYS}
                      for t in self.trees],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleModel":
        n_classes = len(d["label_order"])
        trees = [Tree(**{name: unpack_array(t[name]) for name in _TREE_ARRAYS}, n_classes=n_classes)
                 for t in d["trees"]]
        h = d["hyper"]
        return cls(trees, Variant(d["variant"]), h["n_estimators"], h["max_features"],
                   h["max_depth"], tuple(d["label_order"]), d["n_features"], d.get("seed", 0),
                   d.get("manifest_fingerprint"))


def fit_ensemble(X, y, variant: Variant | str, n_estimators: int = 100, max_features: float = 0.5,
                 max_depth: int | None = None, seed: int = 0, jobs: int = 1,
                 label_order: Sequence[str] | None = None) -> EnsembleModel:
    """Fit ``n_estimators`` trees.

    RFC draws a bootstrap sample per tree and searches midpoints exhaustively;
    ERT uses every row and one random threshold per candidate feature.  Trees
    are independent, so the result does not depend on ``jobs``.
    """
    variant = Variant(variant)
    X = check_training_data(X, y)
    codes, order = encode_labels(y, label_order)
    if np.unique(codes).size < 2:
        raise ValueError("need at least two classes")
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    Xf = np.asfortranarray(X)
    n = X.shape[0]

    def grow(i: int) -> Tree:
        split_seed, rng = tree_seeds(seed, i)
        rows = rng.integers(0, n, size=n) if variant is Variant.RFC else None
        return fit_tree(Xf, codes, variant, max_features, max_depth, split_seed,
                        n_classes=len(order), sample_indices=rows)

    if jobs is None or jobs <= 1:
        trees = [grow(i) for i in range(n_estimators)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trees = list(pool.map(grow, range(n_estimators)))
    return EnsembleModel(trees, variant, n_estimators, float(max_features), max_depth,
                         order, X.shape[1], seed)
