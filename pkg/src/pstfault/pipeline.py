"""Stage orchestration: generate, extract, select, train, evaluate.

Every stage writes a stamp ``stamps/<stage>.json`` holding a fingerprint of
its inputs and the sha256 of each output.  A stage is skipped when the
stamp's fingerprint matches and its outputs are unchanged; an output that
no longer matches its recorded hash is reported as corrupt.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .evaluation import EvalReport, SplitSpec, grid_search, score, stratified_split
from .fault_model import (LABEL_NAMES, SynthConfig, WaveformRecord, enumerate_scenarios,
                          make_record, read_dataset_csv, write_dataset_csv)
from .features import (FeatureManifest, compact_manifest, default_manifest, extract_matrix,
                       read_features_csv, write_features_csv)
from .learners import (StepSchedule, fit_ensemble, fit_logistic, fit_mlp, fit_svm,
                       model_from_json)
from .selection import SelectionReport, select_features

log = logging.getLogger(__name__)

CLASSIFIERS = ("ERT", "RFC", "MLP", "LReg", "SVM")
STAGES = ("generate", "extract", "select", "train", "evaluate")

DEFAULT_HYPER = {
    "ERT": {"n_estimators": 280, "max_features": 0.5, "max_depth": 40},
    "RFC": {"n_estimators": 200, "max_features": 0.1, "max_depth": 30},
    "MLP": {"hidden": [300, 150], "epochs": 200, "batch_size": 64, "rate": 0.01, "every": 50,
            "factor": 0.5, "momentum": 0.9, "alpha": 1e-4},
    "LReg": {"l2_strength": 1e-4, "max_iter": 500, "tol": 1e-5},
    "SVM": {"gamma": 0.001, "regularization": 1e-4, "epochs": 10, "batch_size": 64},
}


class ConfigError(ValueError):
    """Invalid run configuration (exit status 2)."""


class StageError(RuntimeError):
    """A stage failed (exit status 1)."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


def gate_internal(record, threshold_current: float) -> bool:
    """True iff some sample of some channel exceeds ``threshold_current`` in magnitude."""
    if not threshold_current > 0:
        raise ValueError("threshold_current must be positive")
    channels = record.channels if isinstance(record, WaveformRecord) else record
    return bool(np.max(np.abs(np.asarray(channels, dtype=float))) > threshold_current)


@dataclass
class RunConfig:
    work_dir: str = "run"
    dataset_path: str | None = None
    features_path: str | None = None
    models_dir: str | None = None
    reports_dir: str | None = None
    synth: SynthConfig = field(default_factory=SynthConfig)
    angle_step: int = 45
    manifest: str = "default"
    fdr_level: float = 0.05
    classifiers: list[str] = field(default_factory=lambda: list(CLASSIFIERS))
    hyper: dict = field(default_factory=dict)
    grids: dict = field(default_factory=dict)
    standardize: list[str] = field(default_factory=lambda: ["MLP", "LReg", "SVM"])
    train_fraction: float = 2.0 / 3.0
    seed: int = 0
    jobs: int = 1
    threshold_current: float = 0.05

    def __post_init__(self):
        if isinstance(self.synth, dict):
            try:
                self.synth = SynthConfig.from_dict(self.synth)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"synth: {exc}") from None
        unknown = [c for c in self.classifiers if c not in CLASSIFIERS]
        if unknown or not self.classifiers:
            raise ConfigError(f"classifiers must be a non-empty subset of {CLASSIFIERS}, got {unknown}")
        for c in list(self.hyper) + list(self.grids) + list(self.standardize):
            if c not in CLASSIFIERS:
                raise ConfigError(f"unknown classifier {c!r}")
        for c in self.grids:
            if c not in ("ERT", "RFC"):
                raise ConfigError("grid search is supported for ERT and RFC only")
        for c, h in self.hyper.items():
            extra = set(h) - set(DEFAULT_HYPER[c])
            if extra:
                raise ConfigError(f"unknown {c} hyperparameters {sorted(extra)}")
        if not 0 < self.fdr_level < 1:
            raise ConfigError("fdr_level must lie in (0, 1)")
        if not self.threshold_current > 0:
            raise ConfigError("threshold_current must be positive")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            list(enumerate_scenarios(self.angle_step, labels=[]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if self.manifest not in ("default", "compact") and not Path(self.manifest).is_file():
            raise ConfigError(f"manifest must be 'default', 'compact' or a file, got {self.manifest!r}")

    @property
    def effective_synth(self) -> SynthConfig:
        return replace(self.synth, seed=self.seed)

    def hyper_for(self, name: str) -> dict:
        return {**DEFAULT_HYPER[name], **self.hyper.get(name, {})}

    def load_manifest(self) -> FeatureManifest:
        if self.manifest == "default":
            return default_manifest()
        if self.manifest == "compact":
            return compact_manifest()
        return FeatureManifest.load(self.manifest)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["synth"] = self.synth.to_dict()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _fingerprint(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True, default=str).encode()).hexdigest()


class Pipeline:
    def __init__(self, config: RunConfig):
        self.config = config
        work = Path(config.work_dir)
        self.work = work
        self.dataset_path = Path(config.dataset_path or work / "dataset.csv")
        self.features_path = Path(config.features_path or work / "features.csv")
        self.manifest_path = work / "manifest.json"
        self.split_path = work / "split.json"
        self.selection_path = work / "selection.csv"
        self.selection_summary_path = work / "selection_summary.json"
        self.models_dir = Path(config.models_dir or work / "models")
        self.reports_dir = Path(config.reports_dir or work / "reports")
        self.stamps_dir = work / "stamps"
        self.report_path = work / "run_report.json"
        self.report: dict = {"stages": {}}

    # --- stamps -------------------------------------------------------
    def _stamp_path(self, stage: str) -> Path:
        return self.stamps_dir / f"{stage}.json"

    def _up_to_date(self, stage: str, inputs: str, outputs: list[Path]) -> bool:
        stamp_path = self._stamp_path(stage)
        if not stamp_path.exists() or not all(p.exists() for p in outputs):
            return False
        stamp = json.loads(stamp_path.read_text())
        if stamp.get("inputs") != inputs:
            return False
        recorded = stamp.get("outputs", {})
        for p in outputs:
            if recorded.get(self._key(p)) != sha256_file(p):
                raise StageError(stage, f"{p} was modified or corrupted after it was written")
        return True

    def _write_stamp(self, stage: str, inputs: str, outputs: list[Path]) -> None:
        self.stamps_dir.mkdir(parents=True, exist_ok=True)
        stamp = {"inputs": inputs, "outputs": {self._key(p): sha256_file(p) for p in outputs}}
        self._stamp_path(stage).write_text(json.dumps(stamp, indent=1, sort_keys=True))

    def _key(self, path: Path) -> str:
        return os.path.relpath(path, self.work)

    def _output_hash(self, stage: str) -> dict:
        return json.loads(self._stamp_path(stage).read_text())["outputs"]

    def _run_stage(self, stage: str, inputs: dict, outputs: list[Path], body: Callable[[], None]) -> None:
        key = _fingerprint(inputs)
        t0 = time.perf_counter()
        if self._up_to_date(stage, key, outputs):
            self.report["stages"][stage] = {"status": "skipped", "seconds": 0.0}
            log.info("%s: up to date", stage)
            return
        log.info("%s: running", stage)
        try:
            body()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, f"{type(exc).__name__}: {exc}") from exc
        self._write_stamp(stage, key, outputs)
        self.report["stages"][stage] = {"status": "ran", "seconds": time.perf_counter() - t0}

    # --- stages -------------------------------------------------------
    def generate(self) -> None:
        cfg = self.config
        inputs = {"synth": cfg.effective_synth.to_dict(), "angle_step": cfg.angle_step,
                  "threshold_current": cfg.threshold_current}

        def body():
            records, rejected = [], 0
            for label, params in enumerate_scenarios(cfg.angle_step):
                rec = make_record(label, params, cfg.effective_synth)
                if gate_internal(rec, cfg.threshold_current):
                    records.append(rec)
                else:
                    rejected += 1
            self.dataset_path.parent.mkdir(parents=True, exist_ok=True)
            write_dataset_csv(records, self.dataset_path)
            self.report["gated_out"] = rejected

        self._run_stage("generate", inputs, [self.dataset_path], body)
        self.report["dataset_sha256"] = self._output_hash("generate")[self._key(self.dataset_path)]

    def extract(self) -> None:
        self.generate()
        manifest = self.config.load_manifest()
        inputs = {"dataset": self._output_hash("generate"), "manifest": manifest.fingerprint()}

        def body():
            records = read_dataset_csv(self.dataset_path)
            matrix, labels, quality = extract_matrix(records, manifest, jobs=self.config.jobs)
            self.features_path.parent.mkdir(parents=True, exist_ok=True)
            write_features_csv(self.features_path, matrix, labels, manifest.column_names())
            manifest.save(self.manifest_path)
            self.report["extraction_quality"] = quality.to_dict()

        self._run_stage("extract", inputs, [self.features_path, self.manifest_path], body)

    def _load_features(self):
        try:
            return read_features_csv(self.features_path)
        except (OSError, ValueError) as exc:
            raise StageError("extract", f"unreadable features file: {exc}") from None

    def select(self) -> None:
        self.extract()
        cfg = self.config
        inputs = {"features": self._output_hash("extract"), "fdr_level": cfg.fdr_level,
                  "train_fraction": cfg.train_fraction, "seed": cfg.seed}

        def body():
            matrix, labels, names = self._load_features()
            train, test = stratified_split(labels, SplitSpec(cfg.train_fraction, cfg.seed))
            self.split_path.write_text(json.dumps(
                {"train": train.tolist(), "test": test.tolist()}, separators=(",", ":")))
            report = select_features(matrix[train], [labels[i] for i in train], cfg.fdr_level, names)
            report.save(self.selection_path, self.selection_summary_path)

        self._run_stage("select", inputs,
                        [self.split_path, self.selection_path, self.selection_summary_path], body)
        summary = json.loads(self.selection_summary_path.read_text())
        self.report["selection"] = summary

    def _design(self):
        matrix, labels, names = self._load_features()
        split = json.loads(self.split_path.read_text())
        selection = SelectionReport.load(self.selection_path, self.selection_summary_path)
        if list(selection.names) != names:
            raise ValueError("selection does not match the feature columns")
        X = matrix[:, selection.retained]
        y = np.array([str(l) for l in labels])
        return X, y, np.array(split["train"]), np.array(split["test"]), \
            [n for n, k in zip(names, selection.retained) if k]

    def _model_path(self, name: str) -> Path:
        return self.models_dir / f"{name}.json"

    def train(self) -> None:
        self.select()
        cfg = self.config
        manifest_fp = cfg.load_manifest().fingerprint()
        upstream = {"extract": self._output_hash("extract"), "select": self._output_hash("select")}
        for name in cfg.classifiers:
            inputs = {**upstream, "classifier": name, "hyper": cfg.hyper_for(name),
                      "grid": cfg.grids.get(name), "standardize": name in cfg.standardize,
                      "seed": cfg.seed}
            outputs = [self._model_path(name)]
            if name in cfg.grids:
                outputs.append(self.reports_dir / f"{name}_grid.json")

            def body(name=name):
                X, y, train, test, columns = self._design()
                scaler = None
                if name in cfg.standardize:
                    mean = X[train].mean(axis=0)
                    scale = X[train].std(axis=0)
                    scale[scale == 0] = 1.0
                    scaler = {"mean": mean.tolist(), "scale": scale.tolist()}
                    X = (X - mean) / scale
                hyper = cfg.hyper_for(name)
                if name in cfg.grids:
                    result = grid_search((X[train], y[train]), (X[test], y[test]), name,
                                         cfg.grids[name], cfg.seed, cfg.jobs, LABEL_NAMES)
                    self.reports_dir.mkdir(parents=True, exist_ok=True)
                    (self.reports_dir / f"{name}_grid.json").write_text(
                        json.dumps(result.to_dict(), indent=1, sort_keys=True))
                    hyper = {**hyper, **result.best}
                model = fit_classifier(name, X[train], y[train], hyper, cfg.seed, cfg.jobs)
                model.manifest_fingerprint = manifest_fp
                self.models_dir.mkdir(parents=True, exist_ok=True)
                payload = {"classifier": name, "columns": columns, "scaler": scaler,
                           "model": model.to_dict()}
                self._model_path(name).write_text(
                    json.dumps(payload, sort_keys=True, separators=(",", ":")))

            self._run_stage(f"train_{name}", inputs, outputs, body)

    def evaluate(self) -> None:
        self.train()
        cfg = self.config
        self.report["classifiers"] = {}
        for name in cfg.classifiers:
            json_path = self.reports_dir / f"{name}.json"
            csv_path = self.reports_dir / f"{name}_misclassifications.csv"
            inputs = {"model": self._output_hash(f"train_{name}"), "select": self._output_hash("select")}

            def body(name=name, json_path=json_path, csv_path=csv_path):
                X, y, _, test, columns = self._design()
                payload = json.loads(self._model_path(name).read_text())
                if payload["columns"] != columns:
                    raise ValueError("model was trained on different feature columns")
                model = model_from_json(json.dumps(payload["model"]))
                Xt = X[test]
                if payload["scaler"] is not None:
                    Xt = (Xt - np.array(payload["scaler"]["mean"])) / np.array(payload["scaler"]["scale"])
                report = score(model.predict(Xt), y[test], payload["model"].get("hyper", {}), name)
                self.reports_dir.mkdir(parents=True, exist_ok=True)
                report.save(json_path, csv_path)

            self._run_stage(f"evaluate_{name}", inputs, [json_path, csv_path], body)
            rep = EvalReport.from_dict(json.loads(json_path.read_text()))
            self.report["classifiers"][name] = {"accuracy": rep.accuracy, "n_errors": rep.n_errors,
                                                "report": self._key(json_path)}

    def write_report(self, status: int, error: str | None = None) -> None:
        self.work.mkdir(parents=True, exist_ok=True)
        self.report["exit_status"] = status
        self.report["error"] = error
        self.report["config"] = self.config.to_dict()
        self.report_path.write_text(json.dumps(self.report, indent=2, sort_keys=True, default=str))


def fit_classifier(name: str, X, y, hyper: dict, seed: int, jobs: int = 1):
    if name in ("ERT", "RFC"):
        return fit_ensemble(X, y, name, hyper["n_estimators"], hyper["max_features"],
                            hyper["max_depth"], seed, jobs, LABEL_NAMES)
    if name == "LReg":
        return fit_logistic(X, y, hyper["l2_strength"], hyper["max_iter"], hyper["tol"], LABEL_NAMES)
    if name == "MLP":
        schedule = StepSchedule(hyper["rate"], hyper["every"], hyper["factor"], hyper["momentum"])
        return fit_mlp(X, y, hyper["hidden"], hyper["epochs"], schedule, hyper["batch_size"],
                       hyper["alpha"], seed, LABEL_NAMES)
    if name == "SVM":
        return fit_svm(X, y, hyper["gamma"], hyper["regularization"], hyper["epochs"],
                       hyper["batch_size"], seed, LABEL_NAMES)
    raise ValueError(f"unknown classifier {name!r}")


def run_pipeline(config: RunConfig, until: str = "evaluate") -> int:
    """Run stages up to ``until``; returns the exit status and always writes the run report."""
    if until not in STAGES:
        raise ConfigError(f"unknown stage {until!r}")
    pipe = Pipeline(config)
    try:
        getattr(pipe, until)()
    except StageError as exc:
        log.error("%s", exc)
        pipe.report.setdefault("stages", {})[exc.stage] = {"status": "failed"}
        pipe.write_report(1, str(exc))
        return 1
    pipe.write_report(0)
    return 0
