"""Classifiers: logistic regression and random forest, with a common fit/predict front."""
from __future__ import annotations

from dataclasses import dataclass, field

from .artifact import load_model, save_model
from .forest import RFHyper, RFModel, gini_importance, rf_predict, train_forest
from .logistic import LRHyper, LRModel, lr_gradient, lr_loss, lr_predict, predict_proba, train_logistic


@dataclass(frozen=True)
class LearnerSpec:
    """Which learner to fit and with what hyperparameters."""
    kind: str
    lr: LRHyper = field(default_factory=LRHyper)
    rf: RFHyper = field(default_factory=RFHyper)

    def __post_init__(self):
        if self.kind not in ("logistic", "forest"):
            raise ValueError(f"unknown learner kind {self.kind!r}")


def fit(spec: LearnerSpec, X, y, seed: int = 0, workers: int = 1):
    if spec.kind == "logistic":
        return train_logistic(X, y, spec.lr)
    return train_forest(X, y, spec.rf, seed=seed, workers=workers)


def predict(model, X):
    if isinstance(model, LRModel):
        return lr_predict(model, X)
    return rf_predict(model, X)


__all__ = [
    "LRHyper", "LRModel", "RFHyper", "RFModel", "LearnerSpec", "fit", "predict",
    "train_logistic", "predict_proba", "lr_gradient", "lr_loss", "lr_predict",
    "train_forest", "rf_predict", "gini_importance", "save_model", "load_model",
]
