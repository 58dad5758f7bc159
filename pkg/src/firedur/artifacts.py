"""Versioned single-file container for trained models.

One JSON document with named sections: kind, params, feature spec,
standardizer (LSTM only), seeds, weights and training-data fingerprint.
Floats survive the round trip exactly (repr-based JSON encoding), so a
reloaded artifact reproduces its predictions bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import cart, forest, gbt, lstm
from .errors import DataError
from .evaluate import MetricSet
from .features import FeatureSpec, Standardizer

FORMAT_VERSION = 1


def write_text_atomic(path, text: str):
    """Write via a temp file and rename, so failures never leave partial
    artifacts."""
    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def fingerprint_matrix(X, y) -> str:
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(X, dtype=float).tobytes())
    digest.update(np.ascontiguousarray(y, dtype=float).tobytes())
    return "sha256:" + digest.hexdigest()


def _array_payload(arr) -> dict:
    arr = np.asarray(arr, dtype=float)
    return {"shape": list(arr.shape), "data": arr.reshape(-1).tolist()}


def _array_restore(payload) -> np.ndarray:
    return np.array(payload["data"], dtype=float).reshape(payload["shape"])


@dataclass
class Artifact:
    kind: str                      # "rf" | "gbt" | "lstm"
    model: object                  # ForestModel | GbtModel | LstmWeights
    spec: FeatureSpec
    standardizer: Optional[Standardizer]
    params: dict
    seeds: dict
    train_fingerprint: str
    metrics: Optional[MetricSet]


def _params_payload(params) -> dict:
    return dataclasses.asdict(params)


def _forest_payload(model: forest.ForestModel) -> dict:
    return {
        "n_features": model.n_features,
        "trees": [cart.tree_to_dict(tree) for tree in model.trees],
        "importances": model.importances.tolist(),
    }


def _gbt_payload(model: gbt.GbtModel) -> dict:
    return {
        "n_features": model.n_features,
        "base_score": model.base_score,
        "trees": [cart.tree_to_dict(tree) for tree in model.trees],
        "column_masks": model.column_masks,
        "importances": model.importances.tolist(),
        "best_iteration": model.best_iteration,
    }


def _lstm_payload(weights: lstm.LstmWeights) -> dict:
    return {"tensors": {name: _array_payload(tensor)
                        for name, tensor in weights.tensors()},
            "n_embeddings": len(weights.embeddings)}


def artifact_to_json(artifact: Artifact) -> str:
    if artifact.kind == "rf":
        weights = _forest_payload(artifact.model)
    elif artifact.kind == "gbt":
        weights = _gbt_payload(artifact.model)
    elif artifact.kind == "lstm":
        weights = _lstm_payload(artifact.model)
    else:
        raise ValueError(f"unknown artifact kind {artifact.kind!r}")
    metrics = None
    if artifact.metrics is not None:
        metrics = dataclasses.asdict(artifact.metrics)
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": artifact.kind,
        "params": artifact.params,
        "feature_spec": json.loads(artifact.spec.to_json()),
        "standardizer": (json.loads(artifact.standardizer.to_json())
                         if artifact.standardizer is not None else None),
        "seeds": artifact.seeds,
        "weights": weights,
        "train_fingerprint": artifact.train_fingerprint,
        "metrics": metrics,
    }
    return json.dumps(payload, sort_keys=True, indent=1)


def _forest_restore(payload: dict, params: dict) -> forest.ForestModel:
    forest_params = forest.ForestParams(**params)
    trees = [cart.tree_from_dict(entry) for entry in payload["trees"]]
    return forest.ForestModel(
        trees=trees,
        params=forest_params,
        tree_seeds=[],
        importances=np.array(payload["importances"], dtype=float),
        n_features=payload["n_features"],
    )


def _gbt_restore(payload: dict, params: dict) -> gbt.GbtModel:
    gbt_params = gbt.GbtParams(**params)
    trees = [cart.tree_from_dict(entry) for entry in payload["trees"]]
    return gbt.GbtModel(
        base_score=payload["base_score"],
        trees=trees,
        column_masks=payload["column_masks"],
        params=gbt_params,
        importances=np.array(payload["importances"], dtype=float),
        n_features=payload["n_features"],
        best_iteration=payload["best_iteration"],
        val_rmse_curve=[],
    )


def _lstm_restore(payload: dict) -> lstm.LstmWeights:
    tensors = {name: _array_restore(entry)
               for name, entry in payload["tensors"].items()}
    embeddings = [tensors[f"E{idx}"] for idx in range(payload["n_embeddings"])]
    return lstm.LstmWeights(
        embeddings=embeddings,
        W={gate: tensors[f"W_{gate}"] for gate in lstm.GATES},
        U={gate: tensors[f"U_{gate}"] for gate in lstm.GATES},
        b={gate: tensors[f"b_{gate}"] for gate in lstm.GATES},
        w_out=tensors["w_out"],
        b_out=np.asarray(tensors["b_out"]).reshape(()),
    )


def artifact_from_json(text: str) -> Artifact:
    payload = json.loads(text)
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported artifact format version: {version}")
    kind = payload["kind"]
    params = payload["params"]
    if kind == "rf":
        model = _forest_restore(payload["weights"], params)
    elif kind == "gbt":
        model = _gbt_restore(payload["weights"], params)
    elif kind == "lstm":
        model = _lstm_restore(payload["weights"])
    else:
        raise DataError(f"unknown artifact kind {kind!r}")
    spec = FeatureSpec.from_json(json.dumps(payload["feature_spec"]))
    standardizer = None
    if payload["standardizer"] is not None:
        standardizer = Standardizer.from_json(json.dumps(payload["standardizer"]))
    metrics = None
    if payload["metrics"] is not None:
        metrics = MetricSet(**payload["metrics"])
    return Artifact(
        kind=kind,
        model=model,
        spec=spec,
        standardizer=standardizer,
        params=params,
        seeds=payload["seeds"],
        train_fingerprint=payload["train_fingerprint"],
        metrics=metrics,
    )


def save_artifact(path, artifact: Artifact):
    write_text_atomic(path, artifact_to_json(artifact))


def load_artifact(path) -> Artifact:
    with open(path, "r", encoding="utf-8") as handle:
        return artifact_from_json(handle.read())


def predict_log_days(artifact: Artifact, matrix) -> np.ndarray:
    """Log-space predictions for a feature matrix laid out per the
    artifact's own feature spec."""
    matrix = np.asarray(matrix, dtype=float)
    if artifact.kind == "rf":
        return forest.predict_forest(artifact.model, matrix)
    if artifact.kind == "gbt":
        return gbt.predict_gbt(artifact.model, matrix)
    n_numeric = len(artifact.spec.numeric_columns)
    from .features import apply_standardizer  # local import avoids a cycle

    standardized = apply_standardizer(artifact.standardizer, matrix)
    x_num = standardized[:, :n_numeric]
    x_cat = matrix[:, n_numeric:].astype(int)
    return lstm.lstm_predict(artifact.model, x_num, x_cat)
