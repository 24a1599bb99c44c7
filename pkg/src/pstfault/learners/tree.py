"""Gini decision trees for the two randomized ensemble variants.

Trees are stored as flat arrays.  Node ``i`` is a leaf when ``left[i] == -1``;
its class counts live in the CSR slice ``leaf_ptr[i]:leaf_ptr[i + 1]`` of
``leaf_class`` / ``leaf_count``.  Internal nodes send ``x[feature] <= threshold``
to ``left``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numba import njit


class Variant(str, Enum):
    ERT = "ERT"
    RFC = "RFC"


@njit(cache=True, nogil=True)
def _split_feature_sorted(X, y, idx, start, end, f, n_classes, node_counts, node_sq, cl, cr):
    """Best midpoint split on one feature; returns (score, threshold) or (-1, 0)."""
    m = end - start
    vals = np.empty(m)
    for i in range(m):
        vals[i] = X[idx[start + i], f]
    order = np.argsort(vals, kind="mergesort")
    if vals[order[0]] >= vals[order[m - 1]]:
        return -1.0, 0.0
    for c in range(n_classes):
        cl[c] = 0.0
        cr[c] = node_counts[c]
    sq_l = 0.0
    sq_r = node_sq
    best = -1.0
    best_thr = 0.0
    for i in range(m - 1):
        c = y[idx[start + order[i]]]
        sq_l += 2.0 * cl[c] + 1.0
        cl[c] += 1.0
        sq_r -= 2.0 * cr[c] - 1.0
        cr[c] -= 1.0
        a = vals[order[i]]
        b = vals[order[i + 1]]
        if a < b:
            n_l = i + 1.0
            score = sq_l / n_l + sq_r / (m - n_l)
            if score > best:
                best = score
                mid = 0.5 * (a + b)
                best_thr = mid if mid < b else a
    return best, best_thr


@njit(cache=True, nogil=True)
def _split_feature_random(X, y, idx, start, end, f, n_classes, cl, cr):
    """One uniform threshold in (min, max) of the feature at this node."""
    lo = np.inf
    hi = -np.inf
    for i in range(start, end):
        v = X[idx[i], f]
        if v < lo:
            lo = v
        if v > hi:
            hi = v
    if not lo < hi:
        return -1.0, 0.0
    thr = lo + np.random.random() * (hi - lo)
    if thr >= hi or thr <= lo:
        thr = 0.5 * (lo + hi)
        if thr >= hi:
            thr = lo
    for c in range(n_classes):
        cl[c] = 0.0
        cr[c] = 0.0
    n_l = 0.0
    for i in range(start, end):
        c = y[idx[i]]
        if X[idx[i], f] <= thr:
            cl[c] += 1.0
            n_l += 1.0
        else:
            cr[c] += 1.0
    n_r = (end - start) - n_l
    sq_l = 0.0
    sq_r = 0.0
    for c in range(n_classes):
        sq_l += cl[c] * cl[c]
        sq_r += cr[c] * cr[c]
    return sq_l / n_l + sq_r / n_r, thr


@njit(cache=True, nogil=True)
def _best_split(X, y, idx, start, end, perm, quota, extra, n_classes, node_counts):
    """Draw features from ``perm`` until ``quota`` non-constant ones were tried.

    Returns (feature, threshold, score); feature is -1 when every feature is
    constant on the node.  Higher score means lower weighted Gini.
    """
    d = perm.size
    node_sq = 0.0
    for c in range(n_classes):
        node_sq += node_counts[c] * node_counts[c]
    cl = np.empty(n_classes)
    cr = np.empty(n_classes)
    best_f = -1
    best_thr = 0.0
    best = -1.0
    tried = 0
    for j in range(d):
        r = j + np.random.randint(0, d - j)
        tmp = perm[j]
        perm[j] = perm[r]
        perm[r] = tmp
        f = perm[j]
        if extra:
            score, thr = _split_feature_random(X, y, idx, start, end, f, n_classes, cl, cr)
        else:
            score, thr = _split_feature_sorted(X, y, idx, start, end, f, n_classes,
                                               node_counts, node_sq, cl, cr)
        if score < 0.0:
            continue
        tried += 1
        if score > best:
            best = score
            best_f = f
            best_thr = thr
        if tried >= quota:
            break
    return best_f, best_thr, best


@njit(cache=True, nogil=True)
def _build(X, y, idx, n_classes, quota, extra, max_depth, seed):
    np.random.seed(seed)
    m = idx.size
    cap = 2 * m + 1
    feature = np.full(cap, -1, np.int32)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, np.int32)
    right = np.full(cap, -1, np.int32)
    counts = np.zeros((cap, n_classes))
    perm = np.arange(X.shape[1]).astype(np.int64)

    st_node = np.empty(cap, np.int64)
    st_start = np.empty(cap, np.int64)
    st_end = np.empty(cap, np.int64)
    st_depth = np.empty(cap, np.int64)
    sp = 0
    st_node[0] = 0
    st_start[0] = 0
    st_end[0] = m
    st_depth[0] = 0
    sp = 1
    n_nodes = 1
    while sp > 0:
        sp -= 1
        node = st_node[sp]
        start = st_start[sp]
        end = st_end[sp]
        depth = st_depth[sp]
        for i in range(start, end):
            counts[node, y[idx[i]]] += 1.0
        distinct = 0
        for c in range(n_classes):
            if counts[node, c] > 0:
                distinct += 1
        if distinct <= 1 or depth >= max_depth or end - start < 2:
            continue
        f, thr, score = _best_split(X, y, idx, start, end, perm, quota, extra,
                                    n_classes, counts[node])
        if f < 0:
            continue
        # partition idx[start:end] in place
        i = start
        j = end - 1
        while i <= j:
            if X[idx[i], f] <= thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = f
        threshold[node] = thr
        left[node] = n_nodes
        right[node] = n_nodes + 1
        for child, a, b in ((n_nodes + 1, i, end), (n_nodes, start, i)):
            st_node[sp] = child
            st_start[sp] = a
            st_end[sp] = b
            st_depth[sp] = depth + 1
            sp += 1
        n_nodes += 2
    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), counts[:n_nodes].copy())


@njit(cache=True, nogil=True)
def _apply(X, feature, threshold, left, right):
    out = np.empty(X.shape[0], np.int64)
    for r in range(X.shape[0]):
        node = 0
        while left[node] >= 0:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = node
    return out


@njit(cache=True, nogil=True)
def _forest_proba(X, offsets, feature, threshold, left, right, leaf_ptr, leaf_class,
                  leaf_count, n_classes):
    """Mean of per-tree normalized leaf distributions; arrays are concatenated over trees."""
    n_trees = offsets.size - 1
    proba = np.zeros((X.shape[0], n_classes))
    for r in range(X.shape[0]):
        for t in range(n_trees):
            base = offsets[t]
            node = 0
            while left[base + node] >= 0:
                g = base + node
                if X[r, feature[g]] <= threshold[g]:
                    node = left[g]
                else:
                    node = right[g]
            g = base + node
            total = 0.0
            for k in range(leaf_ptr[g], leaf_ptr[g + 1]):
                total += leaf_count[k]
            for k in range(leaf_ptr[g], leaf_ptr[g + 1]):
                proba[r, leaf_class[k]] += leaf_count[k] / total
        for c in range(n_classes):
            proba[r, c] /= n_trees
    return proba


@dataclass
class Tree:
    """Flat-array decision tree (see module docstring for the layout)."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    leaf_ptr: np.ndarray
    leaf_class: np.ndarray
    leaf_count: np.ndarray
    n_classes: int

    @property
    def n_nodes(self) -> int:
        return int(self.feature.size)

    def is_leaf(self, node: int) -> bool:
        return bool(self.left[node] < 0)

    def leaf_counts(self, node: int) -> dict[int, float]:
        a, b = self.leaf_ptr[node], self.leaf_ptr[node + 1]
        return dict(zip(self.leaf_class[a:b].tolist(), self.leaf_count[a:b].tolist()))

    def depth(self) -> int:
        """Length of the longest root-to-leaf path (a lone leaf has depth 0)."""
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.left[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        return _apply(np.asarray(X, dtype=float), self.feature, self.threshold, self.left, self.right)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        offsets = np.array([0, self.n_nodes], dtype=np.int64)
        return _forest_proba(X, offsets, self.feature, self.threshold, self.left, self.right,
                             self.leaf_ptr, self.leaf_class, self.leaf_count, self.n_classes)

    @classmethod
    def from_dense(cls, feature, threshold, left, right, counts) -> "Tree":
        is_leaf = left < 0
        leaf_counts = np.where(is_leaf[:, None], counts, 0.0)
        nz_node, nz_class = np.nonzero(leaf_counts)
        leaf_ptr = np.zeros(feature.size + 1, dtype=np.int64)
        np.add.at(leaf_ptr, nz_node + 1, 1)
        np.cumsum(leaf_ptr, out=leaf_ptr)
        return cls(feature.astype(np.int32), threshold.astype(float), left.astype(np.int32),
                   right.astype(np.int32), leaf_ptr, nz_class.astype(np.int32),
                   leaf_counts[nz_node, nz_class].astype(float), int(counts.shape[1]))


def feature_quota(max_features: float, n_features: int) -> int:
    """Number of features examined per node: ceil(fraction * d), at least one."""
    if not 0 < max_features <= 1:
        raise ValueError("max_features must be a fraction in (0, 1]")
    return max(1, min(n_features, math.ceil(max_features * n_features - 1e-9)))


def fit_tree(X, y, variant: Variant | str, max_features: float = 1.0,
             max_depth: int | None = None, seed: int = 0, n_classes: int | None = None,
             sample_indices=None) -> Tree:
    """Grow one tree on integer class codes ``y``.

    ``sample_indices`` (rows, repeats allowed) restricts and reweights the
    training sample; the ensemble uses it for bootstrap draws.
    """
    variant = Variant(variant)
    X = np.asfortranarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError("X must be a non-empty 2-D array")
    if y.shape != (X.shape[0],):
        raise ValueError("y must have one entry per row of X")
    if y.min() < 0:
        raise ValueError("class codes must be non-negative")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    if n_classes is None:
        n_classes = int(y.max()) + 1
    idx = (np.arange(X.shape[0], dtype=np.int64) if sample_indices is None
           else np.array(sample_indices, dtype=np.int64))
    if idx.size == 0:
        raise ValueError("empty sample")
    depth = np.iinfo(np.int64).max if max_depth is None else int(max_depth)
    if depth < 0:
        raise ValueError("max_depth must be non-negative")
    quota = feature_quota(max_features, X.shape[1])
    parts = _build(X, y, idx, n_classes, quota, variant is Variant.ERT, depth,
                   np.uint32(seed % 2 ** 32))
    return Tree.from_dense(*parts)


def find_best_split(X, y, features, n_classes: int | None = None) -> tuple[int, float, float]:
    """Exhaustive midpoint search over ``features`` on one node.

    Returns ``(feature, threshold, weighted_gini)``; feature is -1 when no
    candidate feature varies.
    """
    X = np.asfortranarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if n_classes is None:
        n_classes = int(y.max()) + 1
    feats = np.asarray(features, dtype=np.int64)
    n = X.shape[0]
    counts = np.bincount(y, minlength=n_classes).astype(float)
    best = (-1, 0.0, -1.0)
    cl = np.empty(n_classes)
    cr = np.empty(n_classes)
    idx = np.arange(n, dtype=np.int64)
    node_sq = float(counts @ counts)
    for f in feats:
        score, thr = _split_feature_sorted(X, y, idx, 0, n, int(f), n_classes, counts, node_sq, cl, cr)
        if score > best[2]:
            best = (int(f), thr, score)
    if best[0] < 0:
        return -1, 0.0, 1.0 - node_sq / n ** 2
    return best[0], best[1], 1.0 - best[2] / n
