"""Scenario grid and synthetic differential-current waveforms.

The waveforms stand in for electromagnetic-transient simulation output of
an indirect symmetrical phase shift transformer.  Each internal fault is a
(location, kind) pair; each case on the scenario grid produces a 3-phase
differential current trace of 1201 samples of which the last 700 are kept.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

RAW_SAMPLES = 1201
WINDOW_SAMPLES = 700
WINDOW_START = RAW_SAMPLES - WINDOW_SAMPLES
PHASES = ("a", "b", "c")


class Location(str, Enum):
    SP = "sp"  # series primary
    SS = "ss"  # series secondary
    EP = "ep"  # exciting primary
    ES = "es"  # exciting secondary


class Kind(str, Enum):
    AG = "a-g"
    BG = "b-g"
    CG = "c-g"
    ABG = "ab-g"
    ACG = "ac-g"
    BCG = "bc-g"
    AB = "ab"
    AC = "ac"
    BC = "bc"
    ABCG = "abc-g"


class Tap(str, Enum):
    HALF = "half"
    FULL = "full"


class Shift(str, Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class Loading(str, Enum):
    LOADED = "loaded"
    NO_LOAD = "no_load"


@dataclass(frozen=True, order=False)
class FaultLabel:
    location: Location
    kind: Kind

    def __str__(self) -> str:
        return f"{self.location.value}_{self.kind.value}"

    @classmethod
    def parse(cls, text: str) -> "FaultLabel":
        loc, sep, kind = text.partition("_")
        if not sep:
            raise ValueError(f"not a fault label: {text!r}")
        return cls(Location(loc), Kind(kind))

    @property
    def index(self) -> int:
        return LABEL_INDEX[self]


ALL_LABELS: tuple[FaultLabel, ...] = tuple(
    FaultLabel(loc, kind) for loc in Location for kind in Kind
)
LABEL_INDEX = {label: i for i, label in enumerate(ALL_LABELS)}
LABEL_NAMES: tuple[str, ...] = tuple(str(label) for label in ALL_LABELS)

ANGLES_FULL = tuple(range(0, 360, 15))
WINDING_FRACTIONS = (30, 40, 50, 60, 70)


@dataclass(frozen=True)
class ScenarioParams:
    inception_angle: int
    winding_fraction: int
    tap: Tap
    shift_direction: Shift
    loading: Loading

    def __post_init__(self):
        if self.inception_angle not in ANGLES_FULL:
            raise ValueError(f"inception_angle {self.inception_angle} is not on the 15 degree grid")
        if self.winding_fraction not in WINDING_FRACTIONS:
            raise ValueError(f"winding_fraction {self.winding_fraction} not in {WINDING_FRACTIONS}")
        # coerce plain strings (e.g. read back from CSV)
        object.__setattr__(self, "tap", Tap(self.tap))
        object.__setattr__(self, "shift_direction", Shift(self.shift_direction))
        object.__setattr__(self, "loading", Loading(self.loading))

    def key(self) -> str:
        return (f"{self.inception_angle}|{self.winding_fraction}|{self.tap.value}"
                f"|{self.shift_direction.value}|{self.loading.value}")


@dataclass(frozen=True)
class SynthConfig:
    system_frequency: float = 60.0
    sample_interval: float = 1e-3
    run_time: float = 1.2
    fault_start: float = 0.5
    base_current: float = 1.0
    dc_time_constant: float = 0.05
    onset_time_constant: float = 1e-3
    harmonic_weights: tuple[tuple[int, float], ...] = ((3, 0.15), (5, 0.05))
    noise_sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(
            self, "harmonic_weights",
            tuple((int(h), float(w)) for h, w in self.harmonic_weights))
        n = self.run_time / self.sample_interval
        if abs(n - round(n)) > 1e-6 or round(n) + 1 != RAW_SAMPLES:
            raise ValueError("run_time / sample_interval + 1 must equal 1201 samples")
        if not 0 <= self.fault_start < self.run_time:
            raise ValueError("fault_start must lie in [0, run_time)")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.base_current <= 0 or self.dc_time_constant <= 0:
            raise ValueError("base_current and dc_time_constant must be positive")
        if self.onset_time_constant < 0:
            raise ValueError("onset_time_constant must be non-negative")

    @property
    def fault_index(self) -> int:
        return int(round(self.fault_start / self.sample_interval))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["harmonic_weights"] = [list(hw) for hw in self.harmonic_weights]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SynthConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown SynthConfig fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "SynthConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass(frozen=True)
class WaveformRecord:
    channels: np.ndarray  # shape (3, 700)
    label: FaultLabel
    params: ScenarioParams

    def __post_init__(self):
        ch = np.asarray(self.channels, dtype=float)
        if ch.shape != (3, WINDOW_SAMPLES):
            raise ValueError(f"channels must have shape (3, {WINDOW_SAMPLES}), got {ch.shape}")
        if not np.all(np.isfinite(ch)):
            raise ValueError("channels contain non-finite samples")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)


def steady_state_power(vs: float, vl: float, xl: float, xpst: float,
                       delta: float, alpha: float) -> float:
    """Real power over a line with a phase shifter in series (per unit).

    ``alpha`` is signed: positive advances the transmission angle, negative
    retards it.  Angles in degrees.
    """
    x = xl + xpst
    if not x > 0:
        raise ValueError("total reactance xl + xpst must be positive")
    return vs * vl / x * math.sin(math.radians(delta + alpha))


def _angle_grid(angle_step: int) -> tuple[int, ...]:
    if (not isinstance(angle_step, (int, np.integer)) or isinstance(angle_step, bool)
            or angle_step <= 0 or angle_step % 15 or 360 % angle_step):
        raise ValueError(f"angle_step must be a multiple of 15 that divides 360, got {angle_step!r}")
    return tuple(range(0, 360, int(angle_step)))


def enumerate_scenarios(angle_step: int = 15,
                        labels: Iterable[FaultLabel] | None = None
                        ) -> list[tuple[FaultLabel, ScenarioParams]]:
    """Cartesian product of the scenario grid for each label, in fixed order."""
    angles = _angle_grid(angle_step)
    grid = [ScenarioParams(*combo) for combo in itertools.product(
        angles, WINDING_FRACTIONS, list(Tap), list(Shift), list(Loading))]
    chosen = ALL_LABELS if labels is None else tuple(labels)
    return [(label, params) for label in chosen for params in grid]


# Per-kind phase involvement: coefficient, angle offset (deg), grounded.
# Line-line fault currents flow out of one phase and back through the other.
_KIND_TABLE: dict[Kind, tuple[tuple[float, float, float], tuple[float, float, float], bool]] = {
    Kind.AG: ((1.0, 0.0, 0.0), (0.0, -120.0, 120.0), True),
    Kind.BG: ((0.0, 1.0, 0.0), (0.0, -120.0, 120.0), True),
    Kind.CG: ((0.0, 0.0, 1.0), (0.0, -120.0, 120.0), True),
    Kind.ABG: ((1.0, 1.0, 0.0), (0.0, -120.0, 120.0), True),
    Kind.ACG: ((1.0, 0.0, 1.0), (0.0, -120.0, 120.0), True),
    Kind.BCG: ((0.0, 1.0, 1.0), (0.0, -120.0, 120.0), True),
    Kind.AB: ((0.87, 0.87, 0.0), (30.0, 210.0, 0.0), False),
    Kind.AC: ((0.87, 0.0, 0.87), (-30.0, 0.0, 150.0), False),
    Kind.BC: ((0.0, 0.87, 0.87), (0.0, -90.0, 90.0), False),
    Kind.ABCG: ((1.0, 1.0, 1.0), (0.0, -120.0, 120.0), True),
}


@dataclass(frozen=True)
class _Signature:
    gain: float
    phase: float          # deg, added to every phase angle
    harmonic_gain: float  # multiplies the configured harmonic weights
    harmonic_phase: float  # deg, shifts harmonics relative to the fundamental
    tau_scale: float      # multiplies the DC time constant


_EXCITING = _Signature(gain=0.70, phase=-50.0, harmonic_gain=0.5, harmonic_phase=150.0, tau_scale=1.8)
_SIGNATURES = {
    Location.SP: _Signature(gain=1.00, phase=0.0, harmonic_gain=1.0, harmonic_phase=0.0, tau_scale=1.0),
    Location.SS: _Signature(gain=0.85, phase=35.0, harmonic_gain=1.8, harmonic_phase=60.0, tau_scale=0.6),
    Location.EP: _EXCITING,
    Location.ES: _EXCITING,
}
# exciting secondary currents are the primary ones seen through the tap ratio
_ES_TAP_RATIO = {Tap.HALF: 1.08, Tap.FULL: 1.08}
_TAP_SCALE = {Tap.HALF: 0.5, Tap.FULL: 1.0}
_SHIFT_ANGLE = {Tap.HALF: 15.0, Tap.FULL: 30.0}
_LOAD_ANGLE = {Loading.LOADED: -8.0, Loading.NO_LOAD: 0.0}


def involvement(kind: Kind) -> tuple[float, float, float]:
    """Per-phase involvement coefficients (zero for healthy phases)."""
    return _KIND_TABLE[kind][0]


def fault_amplitude(label: FaultLabel, params: ScenarioParams, config: SynthConfig) -> float:
    """Nominal fundamental amplitude; equals base_current at 50 % winding, full tap, series primary."""
    amp = (config.base_current * _SIGNATURES[label.location].gain
           * params.winding_fraction / 50.0 * _TAP_SCALE[params.tap])
    if label.location is Location.ES:
        amp *= _ES_TAP_RATIO[params.tap]
    return amp


def case_seed(seed: int, label: FaultLabel, params: ScenarioParams) -> int:
    digest = hashlib.sha256(f"{seed}|{label}|{params.key()}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def synthesize_case(label: FaultLabel, params: ScenarioParams,
                    config: SynthConfig = SynthConfig()) -> np.ndarray:
    """Full 3 x 1201 differential-current trace for one case.

    Pre-fault samples carry noise only.  From ``fault_start`` each involved
    phase carries the fault current at a steady-state angle fixed by the
    location, shift direction and loading, reached through a short
    exponential build-up; for grounded faults the
    inception angle sets the size of a decaying DC offset per phase.
    """
    sig = _SIGNATURES[label.location]
    coeffs, offsets, grounded = _KIND_TABLE[label.kind]
    amp = fault_amplitude(label, params, config)
    fi = config.fault_index

    n = np.arange(RAW_SAMPLES)
    t = n * config.sample_interval
    faulted = n >= fi
    elapsed = np.clip(t - fi * config.sample_interval, 0.0, None)
    decay = np.exp(-elapsed / (config.dc_time_constant * sig.tau_scale)) * faulted
    if config.onset_time_constant > 0:
        # the AC component builds up over a short arc-establishment interval
        envelope = -np.expm1(-elapsed / config.onset_time_constant) * faulted
    else:
        envelope = faulted.astype(float)

    shift = _SHIFT_ANGLE[params.tap] * (1 if params.shift_direction is Shift.FORWARD else -1)
    base_angle = sig.phase + shift + _LOAD_ANGLE[params.loading]
    omega_t = 2 * np.pi * config.system_frequency * t
    hphase = math.radians(sig.harmonic_phase)

    rng = np.random.default_rng(case_seed(config.seed, label, params))
    out = rng.normal(0.0, config.noise_sigma * config.base_current, size=(3, RAW_SAMPLES))
    for p in range(3):
        k = coeffs[p]
        if k == 0.0:
            continue
        theta = math.radians(base_angle + offsets[p])
        x = omega_t + theta
        wave = np.sin(x)
        for order, weight in config.harmonic_weights:
            wave = wave + weight * sig.harmonic_gain * np.sin(order * x + hphase)
        current = k * amp * wave * envelope
        if grounded:
            dc = math.cos(math.radians(params.inception_angle + offsets[p]))
            current = current + k * amp * dc * decay
        out[p] += current
    return out


def capture_window(raw: np.ndarray) -> np.ndarray:
    """Keep the endmost 700 of 1201 samples of each channel."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != RAW_SAMPLES:
        raise ValueError(f"expected (channels, {RAW_SAMPLES}) samples, got shape {raw.shape}")
    return raw[:, WINDOW_START:].copy()


def make_record(label: FaultLabel, params: ScenarioParams,
                config: SynthConfig = SynthConfig()) -> WaveformRecord:
    return WaveformRecord(capture_window(synthesize_case(label, params, config)), label, params)


def generate_dataset(angle_step: int = 15, config: SynthConfig = SynthConfig(),
                     labels: Iterable[FaultLabel] | None = None) -> list[WaveformRecord]:
    return [make_record(label, params, config)
            for label, params in enumerate_scenarios(angle_step, labels)]


DATASET_PARAM_COLUMNS = ("inception_angle", "winding_fraction", "tap", "shift_direction", "loading")


def dataset_header() -> list[str]:
    cols = ["label", *DATASET_PARAM_COLUMNS]
    for ph in PHASES:
        cols.extend(f"{ph}_{i}" for i in range(WINDOW_SAMPLES))
    return cols


def write_dataset_csv(records: Sequence[WaveformRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(dataset_header())
        for rec in records:
            p = rec.params
            w.writerow([str(rec.label), p.inception_angle, p.winding_fraction, p.tap.value,
                        p.shift_direction.value, p.loading.value,
                        *map(repr, rec.channels.ravel().tolist())])


def read_dataset_csv(path: str | Path) -> list[WaveformRecord]:
    records = []
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header != dataset_header():
            raise ValueError(f"{path}: unexpected dataset header")
        for lineno, row in enumerate(r, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                params = ScenarioParams(int(row[1]), int(row[2]), Tap(row[3]),
                                        Shift(row[4]), Loading(row[5]))
                values = np.array(row[6:], dtype=float).reshape(3, WINDOW_SAMPLES)
                records.append(WaveformRecord(values, FaultLabel.parse(row[0]), params))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return records
