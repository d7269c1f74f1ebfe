"""Classifiers, baselines and feature normalizers.

Labels are integers: 1 for human-bot, 0 for human-human.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .baselines import BaselineKind, BaselineModel, train_baselines
from .forest import Criterion, ForestConfig, ForestModel, MaxFeatures, train_forest
from .logreg import ClassWeight, LogisticModel, LogRegConfig, sample_weights, train_logreg
from .normalize import Normalization, Normalizer, fit_normalizer

TrainedModel = Union[LogisticModel, ForestModel, BaselineModel]

MODEL_FORMAT_VERSION = 1

__all__ = [
    "BaselineKind", "BaselineModel", "ClassWeight", "Criterion", "ForestConfig", "ForestModel",
    "LogRegConfig", "LogisticModel", "MaxFeatures", "Normalization", "Normalizer",
    "TrainedModel", "feature_importance", "fit_normalizer", "load_model", "model_from_dict",
    "model_to_dict", "predict", "sample_weights", "save_model", "train_baselines",
    "train_forest", "train_logreg",
]


def predict(model: TrainedModel, X) -> np.ndarray:
    return model.predict(X)


def feature_importance(model: TrainedModel, names: Sequence[str]) -> list[tuple[str, float]]:
    """Mean decrease in impurity, normalized to sum 1, sorted descending
    (ties by name)."""
    if not isinstance(model, ForestModel):
        raise TypeError("feature importance is defined for forest models only")
    if len(names) != model.n_features:
        raise ValueError(f"{len(names)} names for {model.n_features} features")
    imp = model.importances
    return sorted(zip(names, (float(v) for v in imp)), key=lambda kv: (-kv[1], kv[0]))


def model_to_dict(model: TrainedModel, feature_names: Sequence[str] | None = None) -> dict:
    return {
        "format": "botalign-model",
        "version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "feature_names": list(feature_names) if feature_names is not None else None,
        "params": model.to_dict(),
    }


def model_from_dict(obj: dict) -> TrainedModel:
    if obj.get("format") != "botalign-model" or "version" not in obj:
        raise ValueError("not a serialized botalign model")
    if obj["version"] != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {obj['version']}")
    kind, params = obj["kind"], obj["params"]
    if kind == "logreg":
        return LogisticModel.from_dict(params)
    if kind == "forest":
        return ForestModel.from_dict(params)
    if kind in {k.value for k in BaselineKind}:
        return BaselineModel(kind, params["constant"], params["prior"], params["seed"])
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: TrainedModel, path: str | Path, feature_names: Sequence[str] | None = None,
               extra: dict | None = None) -> None:
    obj = model_to_dict(model, feature_names)
    if extra:
        obj["extra"] = extra
    Path(path).write_text(json.dumps(obj, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
