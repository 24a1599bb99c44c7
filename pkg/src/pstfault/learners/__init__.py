"""From-scratch classifiers sharing a fit/predict/serialize contract."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .base import encode_labels
from .ensemble import EnsembleModel, fit_ensemble, tree_seeds
from .linear import LinearModel, fit_logistic, logistic_loss_grad
from .mlp import MlpModel, StepSchedule, fit_mlp, init_weights, mlp_loss_grads
from .svm import SvmModel, fit_svm, rbf_kernel
from .tree import Tree, Variant, feature_quota, find_best_split, fit_tree

Model = EnsembleModel | LinearModel | MlpModel | SvmModel

_KINDS = {cls.kind: cls for cls in (EnsembleModel, LinearModel, MlpModel, SvmModel)}


def predict(model: Model, X) -> list[str]:
    """Labels for one sample (1-D) or many (2-D)."""
    return model.predict(np.asarray(X, dtype=float))


def model_to_json(model: Model) -> str:
    return json.dumps(model.to_dict(), sort_keys=True, separators=(",", ":"))


def model_from_json(text: str) -> Model:
    d = json.loads(text)
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise ValueError(f"unknown model kind {d.get('kind')!r}") from None
    return cls.from_dict(d)


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model))


def load_model(path: str | Path) -> Model:
    return model_from_json(Path(path).read_text())


__all__ = [
    "EnsembleModel", "LinearModel", "MlpModel", "Model", "StepSchedule", "SvmModel", "Tree",
    "Variant", "encode_labels", "feature_quota", "find_best_split", "fit_ensemble",
    "fit_logistic", "fit_mlp", "fit_svm", "fit_tree", "init_weights", "load_model",
    "logistic_loss_grad", "mlp_loss_grads", "model_from_json", "model_to_json", "predict",
    "rbf_kernel", "save_model", "tree_seeds",
]
