"""Binary match classifiers: random forest and multi-layer perceptron.

Both models expose ``scores(X)`` in ``[0, 1]``; :func:`predict` turns scores
into labels with the rule ``score >= 0.5 -> match``.

Models serialize to a JSON container::

    {"format": "eager-model", "version": 1, "kind": "rf" | "mlp",
     "feature_dim": F, "config": {...}, "metadata": {...},
     "trees": [...] | "params": [...]}

Floats are written with ``repr`` precision so a save/load round trip is exact.
"""

from __future__ import annotations

import json

import numpy as np

from ..errors import InputError
from .forest import ForestModel, RandomForestConfig, Tree, train_rf
from .mlp import Adam, MLPConfig, MLPModel, loss_and_grads, mlp_gradient_check, train_mlp

FORMAT = "eager-model"
FORMAT_VERSION = 1

__all__ = [
    "Adam",
    "ForestModel",
    "MLPConfig",
    "MLPModel",
    "RandomForestConfig",
    "load_model",
    "loss_and_grads",
    "mlp_gradient_check",
    "predict",
    "save_model",
    "train_mlp",
    "train_rf",
]


def predict(model, X, threshold: float = 0.5):
    """Labels and match scores for feature rows (array or FeatureMatrix)."""
    X = getattr(X, "X", X)
    X = np.asarray(X, dtype=np.float64)
    if X.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    if X.ndim != 2 or X.shape[1] != model.feature_dim:
        raise InputError(f"model expects {model.feature_dim} features, got shape {X.shape}")
    scores = model.scores(X)
    return (scores >= threshold).astype(np.int64), scores


def model_to_dict(model) -> dict:
    out = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "kind": model.kind,
        "feature_dim": model.feature_dim,
        "config": model.config.to_dict(),
        "metadata": model.metadata,
    }
    if model.kind == "rf":
        out["trees"] = [t.to_dict() for t in model.trees]
    else:
        out["params"] = [{"shape": list(p.shape), "data": p.reshape(-1).tolist()} for p in model.params]
    return out


def model_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise InputError("not an eager model container")
    if d.get("version") != FORMAT_VERSION:
        raise InputError(f"unsupported model format version {d.get('version')}")
    if d["kind"] == "rf":
        cfg = RandomForestConfig(**d["config"])
        return ForestModel([Tree.from_dict(t) for t in d["trees"]], d["feature_dim"], cfg, d["metadata"])
    if d["kind"] == "mlp":
        cfg = MLPConfig(**d["config"])
        params = [np.asarray(p["data"], dtype=np.float64).reshape(p["shape"]) for p in d["params"]]
        return MLPModel(params, d["feature_dim"], cfg, d["metadata"])
    raise InputError(f"unknown model kind {d['kind']!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
