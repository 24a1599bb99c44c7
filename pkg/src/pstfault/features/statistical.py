from __future__ import annotations

import numpy as np

QUANTILES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
STATISTIC_NAMES = (
    "min", "max", "mean", "median", "std", "variance", "skewness", "kurtosis",
    "range", "iqr", *(f"q{q:g}" for q in QUANTILES), "energy", "rms",
    "mean_crossings", "peaks_n1", "peaks_n3", "count_above_mean", "abs_sum_changes",
)


def count_peaks(x: np.ndarray, support: int) -> int:
    """Samples strictly greater than every neighbour within ``support`` on both sides."""
    n = x.size
    if n < 2 * support + 1:
        return 0
    core = x[support: n - support]
    is_peak = np.ones(core.size, dtype=bool)
    for s in range(1, support + 1):
        is_peak &= core > x[support - s: n - support - s]
        is_peak &= core > x[support + s: n - support + s]
    return int(is_peak.sum())


def mean_crossings(x: np.ndarray) -> int:
    above = x > x.mean()
    return int(np.count_nonzero(above[1:] != above[:-1]))


def extract_statistical(signal) -> dict[str, float]:
    """Time-domain summary statistics.

    Skewness and kurtosis (excess) use population moments and are NaN for a
    constant signal.  Quantiles interpolate linearly between order
    statistics.
    """
    x = np.asarray(signal, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("signal must have at least 2 samples")
    mean = x.mean()
    dev = x - mean
    m2 = np.mean(dev ** 2)
    if m2 > 0:
        skew = np.mean(dev ** 3) / m2 ** 1.5
        kurt = np.mean(dev ** 4) / m2 ** 2 - 3.0
    else:
        skew = kurt = float("nan")
    qs = np.quantile(x, (0.25, 0.75, *QUANTILES))
    energy = float(x @ x)
    out = {
        "min": x.min(),
        "max": x.max(),
        "mean": mean,
        "median": np.median(x),
        "std": np.sqrt(m2),
        "variance": m2,
        "skewness": skew,
        "kurtosis": kurt,
        "range": x.max() - x.min(),
        "iqr": qs[1] - qs[0],
    }
    out.update({f"q{q:g}": v for q, v in zip(QUANTILES, qs[2:])})
    out.update({
        "energy": energy,
        "rms": np.sqrt(energy / x.size),
        "mean_crossings": mean_crossings(x),
        "peaks_n1": count_peaks(x, 1),
        "peaks_n3": count_peaks(x, 3),
        "count_above_mean": int(np.count_nonzero(x > mean)),
        "abs_sum_changes": np.abs(np.diff(x)).sum(),
    })
    return {k: float(v) for k, v in out.items()}
