"""Autoregressive, Fourier and wavelet coefficients."""

from __future__ import annotations

import math

import numpy as np


def autoregressive_coeffs(signal, order: int = 10) -> np.ndarray:
    """AR(order) coefficients by Burg's method on the mean-removed signal.

    Returned as ``phi`` with ``x[n] ~ sum_k phi[k-1] * x[n-k]``.  A zero
    variance signal yields all zeros; if the recursion runs out of
    prediction error early the remaining coefficients stay zero.
    """
    x = np.asarray(signal, dtype=float).ravel()
    if order < 1:
        raise ValueError("order must be >= 1")
    if x.size <= 2 * order:
        raise ValueError(f"signal of length {x.size} too short for AR({order})")
    x = x - x.mean()
    phi = np.zeros(order)
    if not np.any(x):
        return phi

    a = np.array([1.0])
    f = x[1:].copy()
    b = x[:-1].copy()
    for _ in range(order):
        den = f @ f + b @ b
        if den <= 0.0:
            break
        k = -2.0 * (f @ b) / den
        ext = np.append(a, 0.0)
        a = ext + k * ext[::-1]
        f, b = (f + k * b)[1:], (b + k * f)[:-1]
    phi[: a.size - 1] = -a[1:]
    return phi


def fft_coefficients(signal, k_max: int = 100) -> dict[str, np.ndarray]:
    """DFT bins ``0..k_max-1`` with X[k] = sum_n x[n] exp(-2 pi i k n / N).

    Returns arrays ``real``, ``imag``, ``abs`` and ``angle`` (radians).
    """
    x = np.asarray(signal, dtype=float).ravel()
    if x.size < 2:
        raise ValueError("signal must have at least 2 samples")
    if not 1 <= k_max <= x.size // 2:
        raise ValueError(f"k_max must lie in [1, {x.size // 2}], got {k_max}")
    spec = np.fft.rfft(x)[:k_max]
    return {"real": spec.real.copy(), "imag": spec.imag.copy(),
            "abs": np.abs(spec), "angle": np.angle(spec)}


def ricker_support(width: float) -> int:
    """Odd sample count covering +-8 widths, where the wavelet is below 1e-12."""
    return 2 * int(math.ceil(8 * width)) + 1


def ricker(points: int, width: float) -> np.ndarray:
    """Ricker (Mexican hat) wavelet sampled at ``points`` centred positions."""
    amp = 2 / (math.sqrt(3 * width) * math.pi ** 0.25)
    t = np.arange(points) - (points - 1) / 2.0
    tsq = (t / width) ** 2
    return amp * (1 - tsq) * np.exp(-tsq / 2)


def cwt_transform(signal, width: float) -> np.ndarray:
    """Ricker wavelet response at every sample, zero-padded at both ends."""
    x = np.asarray(signal, dtype=float).ravel()
    if not width > 0:
        raise ValueError("widths must be positive")
    w = ricker(ricker_support(width), width)
    half = (w.size - 1) // 2
    full = np.convolve(x, w)
    return full[half: half + x.size]


def cwt_coefficients(signal, widths, positions) -> np.ndarray:
    """Wavelet responses at each (width, position); shape (len(widths), len(positions))."""
    x = np.asarray(signal, dtype=float).ravel()
    pos = np.asarray(positions, dtype=int)
    if pos.size and (pos.min() < 0 or pos.max() >= x.size):
        raise ValueError(f"positions must lie in [0, {x.size - 1}]")
    out = np.empty((len(widths), pos.size))
    for i, width in enumerate(widths):
        out[i] = cwt_transform(x, width)[pos]
    return out
