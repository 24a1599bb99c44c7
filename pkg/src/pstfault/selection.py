"""Univariate relevance screening of features against the fault class."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import betainc


def _class_codes(labels) -> tuple[np.ndarray, int]:
    _, codes = np.unique(np.asarray([str(l) for l in labels]), return_inverse=True)
    return codes, int(codes.max()) + 1 if codes.size else 0


def anova_f(matrix: np.ndarray, labels) -> tuple[np.ndarray, np.ndarray, int, int]:
    """One-way ANOVA F per column.

    Returns ``(F, p, df_between, df_within)``.  A column that is constant
    within every class but differs between classes gets ``F = inf, p = 0``;
    one with no between-class variance gets ``F = 0, p = 1``.
    """
    X = np.asarray(matrix, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    codes, k = _class_codes(labels)
    if X.shape[0] != codes.size:
        raise ValueError("labels and matrix rows differ in length")
    if k < 2:
        raise ValueError("ANOVA needs at least two classes")
    counts = np.bincount(codes, minlength=k).astype(float)
    if counts.min() < 2:
        raise ValueError("every class needs at least two samples")
    n = X.shape[0]
    df_b, df_w = k - 1, n - k

    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, codes, X)
    class_means = sums / counts[:, None]
    grand = X.mean(axis=0)
    ss_between = (counts[:, None] * (class_means - grand) ** 2).sum(axis=0)
    ss_within = ((X - class_means[codes]) ** 2).sum(axis=0)

    # relative floor against round-off in near-degenerate columns
    scale = np.maximum(np.abs(X).max(axis=0), 1e-300) ** 2 * n
    eps = 1e-24 * scale
    between_zero = ss_between <= eps
    within_zero = ss_within <= eps

    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ss_between / df_b) / (ss_within / df_w)
    f = np.where(between_zero, 0.0, np.where(within_zero, np.inf, f))
    p = f_survival(f, df_b, df_w)
    return f, p, df_b, df_w


def f_survival(f, df1: int, df2: int) -> np.ndarray:
    """Upper tail of the F distribution via the regularized incomplete beta."""
    f = np.asarray(f, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = df2 / (df2 + df1 * f)
    p = betainc(df2 / 2.0, df1 / 2.0, np.where(np.isinf(f), 0.0, x))
    p = np.where(f <= 0, 1.0, p)
    return np.clip(p, 0.0, 1.0)


def anova_f_pvalue(feature_column, labels) -> float:
    return float(anova_f(np.asarray(feature_column, dtype=float)[:, None], labels)[1][0])


def benjamini_yekutieli(p_values, level: float) -> np.ndarray:
    """Boolean mask of hypotheses rejected at false-discovery level ``level``
    under arbitrary dependence."""
    p = np.asarray(p_values, dtype=float)
    m = p.size
    if m == 0:
        return np.zeros(0, dtype=bool)
    harmonic = np.sum(1.0 / np.arange(1, m + 1))
    order = np.argsort(p, kind="stable")
    crit = level * np.arange(1, m + 1) / (m * harmonic)
    below = np.nonzero(p[order] <= crit)[0]
    keep = np.zeros(m, dtype=bool)
    if below.size:
        keep[order[: below[-1] + 1]] = True
    return keep


@dataclass(frozen=True)
class SelectionReport:
    names: tuple[str, ...]
    p_values: np.ndarray
    retained: np.ndarray
    fdr_level: float

    @property
    def retained_count(self) -> int:
        return int(self.retained.sum())

    @property
    def dropped_fraction(self) -> float:
        return 1.0 - self.retained_count / len(self.names)

    @property
    def retained_indices(self) -> np.ndarray:
        return np.flatnonzero(self.retained)

    def summary(self) -> dict:
        return {"total": len(self.names), "retained": self.retained_count,
                "dropped": len(self.names) - self.retained_count,
                "dropped_fraction": self.dropped_fraction, "fdr_level": self.fdr_level}

    def save(self, csv_path: str | Path, summary_path: str | Path) -> None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["name", "p_value", "retained"])
            for name, p, keep in zip(self.names, self.p_values.tolist(), self.retained.tolist()):
                w.writerow([name, repr(p), int(keep)])
        Path(summary_path).write_text(json.dumps(self.summary(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, csv_path: str | Path, summary_path: str | Path) -> "SelectionReport":
        summary = json.loads(Path(summary_path).read_text())
        names, ps, keep = [], [], []
        with open(csv_path, newline="") as fh:
            r = csv.reader(fh)
            if next(r, None) != ["name", "p_value", "retained"]:
                raise ValueError(f"{csv_path}: unexpected selection header")
            for row in r:
                names.append(row[0])
                ps.append(float(row[1]))
                keep.append(row[2] == "1")
        return cls(tuple(names), np.array(ps), np.array(keep, dtype=bool), summary["fdr_level"])


def select_features(matrix: np.ndarray, labels, fdr_level: float = 0.05,
                    names: Sequence[str] | None = None) -> SelectionReport:
    """Keep the columns whose ANOVA p-values survive Benjamini-Yekutieli control."""
    X = np.asarray(matrix, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("matrix must be 2-D with at least one column")
    if not 0 < fdr_level < 1:
        raise ValueError("fdr_level must lie in (0, 1)")
    if names is None:
        names = [f"f{i}" for i in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("names must match the column count")
    _, p, _, _ = anova_f(X, labels)
    return SelectionReport(tuple(names), p, benjamini_yekutieli(p, fdr_level), fdr_level)
