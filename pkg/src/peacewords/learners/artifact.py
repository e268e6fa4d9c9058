"""JSON model artifacts for both learners."""
from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..errors import DataError
from .forest import RFHyper, RFModel, Tree
from .logistic import LRHyper, LRModel

FORMAT_VERSION = "peacewords-model/1"


def _arr(a):
    return None if a is None else np.asarray(a).tolist()


def model_to_dict(model, vocab_digest: str | None = None, normalization: str | None = None) -> dict:
    doc = {
        "format": FORMAT_VERSION,
        "vocabulary": {"sha256": vocab_digest, "size": int(getattr(model, "n_features"))},
        "normalization": normalization,
        "classes": list(model.classes),
    }
    if isinstance(model, LRModel):
        doc.update(
            kind="logistic",
            hyper=asdict(model.hyper),
            weights=_arr(model.weights),
            bias=_arr(model.bias),
            mean=_arr(model.mean),
            scale=_arr(model.scale),
            n_iter=model.n_iter,
            converged=model.converged,
        )
    elif isinstance(model, RFModel):
        doc.update(
            kind="forest",
            hyper=asdict(model.hyper),
            seed=model.seed,
            trees=[
                {
                    "feature": _arr(t.feature),
                    "threshold": _arr(t.threshold),
                    "left": _arr(t.left),
                    "right": _arr(t.right),
                    "value": _arr(t.value),
                    "impurity": _arr(t.impurity),
                    "n_samples": _arr(t.n_samples),
                }
                for t in model.trees
            ],
        )
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")
    return doc


def model_from_dict(doc: dict):
    if doc.get("format") != FORMAT_VERSION:
        raise DataError(f"unsupported model format {doc.get('format')!r}")
    classes = tuple(doc["classes"])
    if doc["kind"] == "logistic":
        weights = np.array(doc["weights"], dtype=float)
        bias = doc["bias"] if len(classes) == 2 else np.array(doc["bias"], dtype=float)
        mean = None if doc["mean"] is None else np.array(doc["mean"], dtype=float)
        scale = None if doc["scale"] is None else np.array(doc["scale"], dtype=float)
        return LRModel(classes, weights, bias, mean, scale, LRHyper(**doc["hyper"]),
                       doc["n_iter"], doc["converged"])
    if doc["kind"] == "forest":
        trees = [
            Tree(
                np.array(t["feature"], dtype=int), np.array(t["threshold"], dtype=float),
                np.array(t["left"], dtype=int), np.array(t["right"], dtype=int),
                np.array(t["value"], dtype=float).reshape(len(t["feature"]), len(classes)),
                np.array(t["impurity"], dtype=float), np.array(t["n_samples"], dtype=int),
            )
            for t in doc["trees"]
        ]
        return RFModel(classes, doc["vocabulary"]["size"], trees, RFHyper(**doc["hyper"]), doc["seed"])
    raise DataError(f"unknown model kind {doc['kind']!r}")


def save_model(model, path: str | Path, vocab_digest: str | None = None, normalization: str | None = None) -> None:
    doc = model_to_dict(model, vocab_digest, normalization)
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def read_model_meta(path: str | Path) -> dict:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return {"vocabulary": doc["vocabulary"], "normalization": doc["normalization"], "kind": doc["kind"]}
