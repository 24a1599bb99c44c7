"""Regularity and histogram entropies of a 1-D signal."""

from __future__ import annotations

import math

import numpy as np
from numba import njit


def _validate(x, m, r):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("signal must be one-dimensional")
    if m < 1:
        raise ValueError("embedding length m must be >= 1")
    if len(x) <= m + 1:
        raise ValueError(f"signal of length {len(x)} too short for m={m}")
    if not r > 0:
        raise ValueError("tolerance r must be positive")
    return x


@njit(cache=True, nogil=True)
def _apen_counts(x, m, r):
    n = x.shape[0]
    nm = n - m + 1       # templates of length m
    nm1 = n - m          # templates of length m + 1
    cm = np.ones(nm)     # self-matches included
    cm1 = np.ones(nm1)
    for i in range(nm):
        for j in range(i + 1, nm):
            ok = True
            for k in range(m):
                if abs(x[i + k] - x[j + k]) > r:
                    ok = False
                    break
            if not ok:
                continue
            cm[i] += 1.0
            cm[j] += 1.0
            if j < nm1 and abs(x[i + m] - x[j + m]) <= r:
                cm1[i] += 1.0
                cm1[j] += 1.0
    return cm, cm1


@njit(cache=True, nogil=True)
def _sampen_counts(x, m, r):
    n = x.shape[0]
    nt = n - m  # same template count for lengths m and m + 1
    a = 0
    b = 0
    for i in range(nt):
        for j in range(i + 1, nt):
            ok = True
            for k in range(m):
                if abs(x[i + k] - x[j + k]) > r:
                    ok = False
                    break
            if not ok:
                continue
            b += 1
            if abs(x[i + m] - x[j + m]) <= r:
                a += 1
    return a, b


def approximate_entropy(signal, m: int = 2, r: float = 0.2) -> float:
    """Approximate entropy ApEn(m, r), self-matches counted.

    Templates match when their Chebyshev distance is <= r.  The result is
    clamped at zero.
    """
    x = _validate(signal, m, r)
    cm, cm1 = _apen_counts(x, m, float(r))
    phi_m = np.mean(np.log(cm / len(cm)))
    phi_m1 = np.mean(np.log(cm1 / len(cm1)))
    return max(float(phi_m - phi_m1), 0.0)


def sample_entropy(signal, m: int = 2, r: float = 0.2, return_flag: bool = False):
    """Sample entropy -ln(A/B), self-matches excluded.

    B counts template pairs of length m within r, A those of length m + 1,
    both over the same N - m templates.  When either count is zero the
    estimate is undefined; ``ln(2 (N - m))`` is returned instead, and with
    ``return_flag=True`` the result is ``(value, undefined)``.
    """
    x = _validate(signal, m, r)
    a, b = _sampen_counts(x, m, float(r))
    undefined = a == 0 or b == 0
    if undefined:
        value = math.log(2 * (len(x) - m))
    else:
        value = -math.log(a / b)
    return (value, undefined) if return_flag else value


def binned_entropy(signal, bins: int = 10) -> float:
    """Shannon entropy (nats) of an equal-width histogram over [min, max]."""
    x = np.asarray(signal, dtype=float).ravel()
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if x.size < 1:
        raise ValueError("signal must not be empty")
    counts, _ = np.histogram(x, bins=bins)
    p = counts[counts > 0] / x.size
    return float(-np.sum(p * np.log(p)))
