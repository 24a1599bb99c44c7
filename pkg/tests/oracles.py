"""Direct-definition reference implementations used as test oracles.

These are written for clarity, not speed: plain loops over the textbook
definitions, sharing no code with the package.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter


def apen(x, m, r):
    n = len(x)

    def phi(mm):
        templates = [x[i:i + mm] for i in range(n - mm + 1)]
        total = 0.0
        for a in templates:
            c = sum(1 for b in templates if max(abs(p - q) for p, q in zip(a, b)) <= r)
            total += math.log(c / len(templates))
        return total / len(templates)

    return phi(m) - phi(m + 1)


def sampen_counts(x, m, r):
    """(A, B): matching pairs of length m+1 and m over the first N-m templates."""
    n = len(x)
    a = b = 0
    for i in range(n - m):
        for j in range(i + 1, n - m):
            if all(abs(x[i + k] - x[j + k]) <= r for k in range(m)):
                b += 1
                if abs(x[i + m] - x[j + m]) <= r:
                    a += 1
    return a, b


def sampen(x, m, r):
    a, b = sampen_counts(x, m, r)
    if a == 0 or b == 0:
        return math.log(2 * (len(x) - m))
    return -math.log(a / b)


def binned_entropy(x, bins):
    lo, hi = min(x), max(x)
    if hi == lo:
        return 0.0
    width = (hi - lo) / bins
    counts = Counter(min(int((v - lo) / width), bins - 1) for v in x)
    n = len(x)
    return -sum(c / n * math.log(c / n) for c in counts.values())


def dft(x):
    n = len(x)
    return [sum(x[t] * cmath.exp(-2j * math.pi * k * t / n) for t in range(n)) for k in range(n)]


def ricker_value(t, width):
    amp = 2 / (math.sqrt(3 * width) * math.pi ** 0.25)
    u = (t / width) ** 2
    return amp * (1 - u) * math.exp(-u / 2)


def cwt_point(x, width, position):
    """Zero-padded correlation of x with a Ricker wavelet centred at ``position``."""
    half = math.ceil(8 * width)
    total = 0.0
    for s in range(-half, half + 1):
        i = position + s
        if 0 <= i < len(x):
            total += x[i] * ricker_value(s, width)
    return total


def gini(labels):
    n = len(labels)
    if n == 0:
        return 0.0
    return 1.0 - sum((c / n) ** 2 for c in Counter(labels).values())


def best_split_exhaustive(X, y, features):
    """Minimum weighted Gini over all (feature, midpoint) candidates."""
    n = len(y)
    best = math.inf
    for f in features:
        values = sorted(set(row[f] for row in X))
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2
            left = [y[i] for i in range(n) if X[i][f] <= thr]
            right = [y[i] for i in range(n) if X[i][f] > thr]
            best = min(best, (len(left) * gini(left) + len(right) * gini(right)) / n)
    return best


def anova_f(column, labels):
    groups: dict = {}
    for v, l in zip(column, labels):
        groups.setdefault(l, []).append(v)
    n = len(column)
    k = len(groups)
    grand = sum(column) / n
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups.values())
    ssw = sum(sum((v - sum(g) / len(g)) ** 2 for v in g) for g in groups.values())
    return (ssb / (k - 1)) / (ssw / (n - k))


def recount(predictions, truths):
    """Accuracy, per-class (precision, recall, f1), and the confusion counts."""
    classes = sorted(set(predictions) | set(truths))
    correct = sum(p == t for p, t in zip(predictions, truths))
    per = {}
    for c in classes:
        tp = sum(1 for p, t in zip(predictions, truths) if p == c and t == c)
        fp = sum(1 for p, t in zip(predictions, truths) if p == c and t != c)
        fn = sum(1 for p, t in zip(predictions, truths) if p != c and t == c)
        prec = tp / (tp + fp) if tp + fp else 0.0
        rec = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        per[c] = (prec, rec, f1)
    confusions = Counter((t, p) for p, t in zip(predictions, truths) if p != t)
    return correct / len(truths), per, confusions
