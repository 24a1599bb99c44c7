"""Feature manifests and whole-record extraction."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..fault_model import PHASES, WINDOW_SAMPLES, FaultLabel, WaveformRecord
from .entropy import approximate_entropy, binned_entropy, sample_entropy
from .spectral import autoregressive_coeffs, cwt_transform, fft_coefficients
from .statistical import STATISTIC_NAMES, extract_statistical

EXTRACTORS = ("statistical", "apen", "sampen", "binned_entropy", "ar", "fft", "cwt")
FFT_ATTRS = ("real", "imag", "abs", "angle")


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str
    extractor: str
    params: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.extractor not in EXTRACTORS:
            raise ValueError(f"unknown extractor {self.extractor!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "extractor": self.extractor, "params": dict(self.params)}


def statistic(stat: str) -> FeatureDescriptor:
    if stat not in STATISTIC_NAMES:
        raise ValueError(f"unknown statistic {stat!r}")
    return FeatureDescriptor(f"stat__{stat}", "statistical", {"stat": stat})


def apen(m: int = 2, r_factor: float = 0.2) -> FeatureDescriptor:
    return FeatureDescriptor(f"apen__m{m}_r{r_factor:g}", "apen", {"m": m, "r_factor": r_factor})


def sampen(m: int = 2, r_factor: float = 0.2) -> FeatureDescriptor:
    return FeatureDescriptor(f"sampen__m{m}_r{r_factor:g}", "sampen", {"m": m, "r_factor": r_factor})


def binned(bins: int) -> FeatureDescriptor:
    return FeatureDescriptor(f"binned_entropy__bins{bins}", "binned_entropy", {"bins": bins})


def ar_coeff(order: int, k: int) -> FeatureDescriptor:
    return FeatureDescriptor(f"ar__order{order}__k{k}", "ar", {"order": order, "k": k})


def fft_coeff(k: int, attr: str) -> FeatureDescriptor:
    if attr not in FFT_ATTRS:
        raise ValueError(f"unknown FFT attribute {attr!r}")
    return FeatureDescriptor(f"fft__k{k}__{attr}", "fft", {"k": k, "attr": attr})


def cwt_coeff(width: float, position: int) -> FeatureDescriptor:
    return FeatureDescriptor(f"cwt__w{width:g}__p{position}", "cwt",
                             {"width": width, "position": position})


class FeatureManifest:
    """Ordered, immutable list of per-phase feature descriptors."""

    def __init__(self, descriptors: Sequence[FeatureDescriptor]):
        self._descriptors = tuple(descriptors)
        if not self._descriptors:
            raise ValueError("manifest must not be empty")
        names = [d.name for d in self._descriptors]
        if len(set(names)) != len(names):
            raise ValueError("descriptor names must be unique")

    @property
    def descriptors(self) -> tuple[FeatureDescriptor, ...]:
        return self._descriptors

    def __len__(self) -> int:
        return len(self._descriptors)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureManifest) and self._descriptors == other._descriptors

    def column_names(self) -> list[str]:
        return [f"{ph}__{d.name}" for ph in PHASES for d in self._descriptors]

    def to_json(self) -> str:
        return json.dumps([d.to_dict() for d in self._descriptors], indent=1)

    def fingerprint(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_json(cls, text: str) -> "FeatureManifest":
        return cls([FeatureDescriptor(d["name"], d["extractor"], d.get("params", {}))
                    for d in json.loads(text)])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "FeatureManifest":
        return cls.from_json(Path(path).read_text())


DEFAULT_CWT_WIDTHS = (2, 5, 10, 20)
DEFAULT_CWT_POSITIONS = 80
DEFAULT_FFT_BINS = 100
DEFAULT_AR_ORDER = 10
DEFAULT_BINS = (5, 10, 20)


def default_manifest(length: int = WINDOW_SAMPLES) -> FeatureManifest:
    positions = np.linspace(0, length - 1, DEFAULT_CWT_POSITIONS).round().astype(int)
    descs = [statistic(s) for s in STATISTIC_NAMES]
    descs += [apen(2, 0.2), sampen(2, 0.2)]
    descs += [binned(b) for b in DEFAULT_BINS]
    descs += [ar_coeff(DEFAULT_AR_ORDER, k) for k in range(1, DEFAULT_AR_ORDER + 1)]
    descs += [fft_coeff(k, attr) for k in range(DEFAULT_FFT_BINS) for attr in FFT_ATTRS]
    descs += [cwt_coeff(w, int(p)) for w in DEFAULT_CWT_WIDTHS for p in positions]
    return FeatureManifest(descs)


def compact_manifest(length: int = WINDOW_SAMPLES) -> FeatureManifest:
    """Small manifest for smoke runs: statistics, entropies, AR(4), 50 FFT magnitudes."""
    positions = np.linspace(0, length - 1, 10).round().astype(int)
    descs = [statistic(s) for s in STATISTIC_NAMES]
    descs += [apen(2, 0.2), sampen(2, 0.2), binned(10)]
    descs += [ar_coeff(4, k) for k in range(1, 5)]
    descs += [fft_coeff(k, "abs") for k in range(50)]
    descs += [cwt_coeff(w, int(p)) for w in (5, 20) for p in positions]
    return FeatureManifest(descs)


@dataclass
class ExtractionQuality:
    """Counts of substituted values over an extraction run."""
    non_finite_replaced: int = 0
    sampen_undefined: int = 0

    def add(self, other: "ExtractionQuality") -> None:
        self.non_finite_replaced += other.non_finite_replaced
        self.sampen_undefined += other.sampen_undefined

    def to_dict(self) -> dict:
        return {"non_finite_replaced": self.non_finite_replaced,
                "sampen_undefined": self.sampen_undefined}


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label: FaultLabel
    quality: ExtractionQuality = field(default_factory=ExtractionQuality, compare=False)


def _tolerance(x: np.ndarray, r_factor: float) -> float:
    return r_factor * float(np.std(x))


def extract_signal(x: np.ndarray, manifest: FeatureManifest) -> tuple[np.ndarray, ExtractionQuality]:
    """Apply every descriptor to a single signal; shared intermediate results are computed once."""
    x = np.asarray(x, dtype=float)
    quality = ExtractionQuality()
    cache: dict = {}
    out = np.empty(len(manifest))

    def group(key, compute):
        if key not in cache:
            cache[key] = compute()
        return cache[key]

    k_max = max((d.params["k"] + 1 for d in manifest.descriptors if d.extractor == "fft"), default=0)
    for i, d in enumerate(manifest.descriptors):
        p = d.params
        kind = d.extractor
        if kind == "statistical":
            v = group("stat", lambda: extract_statistical(x))[p["stat"]]
        elif kind in ("apen", "sampen"):
            m, rf = int(p["m"]), float(p["r_factor"])
            r = _tolerance(x, rf)
            if r == 0.0:
                v = 0.0  # perfectly regular
            elif kind == "apen":
                v = group(("apen", m, rf), lambda: approximate_entropy(x, m, r))
            else:
                v, undefined = group(("sampen", m, rf),
                                     lambda: sample_entropy(x, m, r, return_flag=True))
                quality.sampen_undefined += int(undefined)
        elif kind == "binned_entropy":
            v = group(("binned", p["bins"]), lambda: binned_entropy(x, int(p["bins"])))
        elif kind == "ar":
            v = group(("ar", p["order"]), lambda: autoregressive_coeffs(x, int(p["order"])))[p["k"] - 1]
        elif kind == "fft":
            v = group("fft", lambda: fft_coefficients(x, k_max))[p["attr"]][p["k"]]
        else:
            v = group(("cwt", p["width"]), lambda: cwt_transform(x, float(p["width"])))[p["position"]]
        out[i] = v

    bad = ~np.isfinite(out)
    if bad.any():
        quality.non_finite_replaced += int(bad.sum())
        out[bad] = 0.0
    return out, quality


def extract_all(record: WaveformRecord, manifest: FeatureManifest) -> FeatureVector:
    """Phase-major feature vector: all of phase a, then b, then c."""
    parts = []
    quality = ExtractionQuality()
    for ch in record.channels:
        values, q = extract_signal(ch, manifest)
        parts.append(values)
        quality.add(q)
    return FeatureVector(np.concatenate(parts), record.label, quality)


def _extract_chunk(args):
    channels, manifest_json = args
    manifest = FeatureManifest.from_json(manifest_json)
    rows = np.empty((len(channels), 3 * len(manifest)))
    quality = ExtractionQuality()
    for i, chans in enumerate(channels):
        for p in range(3):
            values, q = extract_signal(chans[p], manifest)
            rows[i, p * len(manifest):(p + 1) * len(manifest)] = values
            quality.add(q)
    return rows, quality


def extract_matrix(records: Sequence[WaveformRecord], manifest: FeatureManifest,
                   jobs: int = 1, chunk_size: int = 64
                   ) -> tuple[np.ndarray, list[FaultLabel], ExtractionQuality]:
    """Feature matrix for many records; row order follows ``records`` regardless of ``jobs``."""
    n = len(records)
    matrix = np.empty((n, 3 * len(manifest)))
    quality = ExtractionQuality()
    chunks = [(i, min(i + chunk_size, n)) for i in range(0, n, chunk_size)]
    payloads = [([records[j].channels for j in range(a, b)], manifest.to_json()) for a, b in chunks]
    if jobs is None or jobs <= 0:
        jobs = os.cpu_count() or 1
    if jobs == 1 or len(chunks) <= 1:
        results = map(_extract_chunk, payloads)
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_extract_chunk, payloads)
    for (a, b), (rows, q) in zip(chunks, results):
        matrix[a:b] = rows
        quality.add(q)
    if jobs != 1 and len(chunks) > 1:
        pool.shutdown()
    return matrix, [r.label for r in records], quality


def write_features_csv(path: str | Path, matrix: np.ndarray, labels: Sequence[FaultLabel],
                       columns: Sequence[str]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", *columns])
        for label, row in zip(labels, matrix):
            w.writerow([str(label), *map(repr, row.tolist())])


def read_features_csv(path: str | Path) -> tuple[np.ndarray, list[FaultLabel], list[str]]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if not header or header[0] != "label":
            raise ValueError(f"{path}: missing 'label' header")
        labels, rows = [], []
        for lineno, row in enumerate(r, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                labels.append(FaultLabel.parse(row[0]))
                rows.append(np.array(row[1:], dtype=float))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    matrix = np.vstack(rows) if rows else np.empty((0, len(header) - 1))
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{path}: non-finite feature values")
    return matrix, labels, header[1:]
