"""Splits, leave-one-out cross-validation, metrics, run aggregation and the Z test."""
from __future__ import annotations

import csv
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DataError
from .learners import LearnerSpec, LRModel, fit, predict, predict_proba

log = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")


def derive_seeds(seed: int, n: int) -> list[int]:
    """n independent 32-bit seeds from one master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def split_80_20(labels: Sequence[int], seed: int = 0, test_fraction: float = 0.2):
    """Stratified train/test index split.

    The test set has ``round(test_fraction * n)`` samples (at least one),
    shared among classes by largest remainder; every class keeps at least one
    training sample. Returns sorted (train, test) index arrays.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if n < 5:
        raise DataError(f"need at least 5 samples for an 80/20 split, got {n}")
    n_test = max(1, round(test_fraction * n))
    classes, counts = np.unique(labels, return_counts=True)
    quota = n_test * counts / n
    cap = counts - 1
    alloc = np.minimum(np.floor(quota).astype(int), cap)
    order = np.argsort(-(quota - np.floor(quota)), kind="stable")
    remaining = n_test - alloc.sum()
    while remaining > 0 and np.any(alloc < cap):
        for i in order:
            if remaining and alloc[i] < cap[i]:
                alloc[i] += 1
                remaining -= 1
    rng = np.random.default_rng(seed)
    test = []
    for c, k in zip(classes, alloc):
        members = np.nonzero(labels == c)[0]
        test.extend(rng.choice(members, size=k, replace=False).tolist())
    test = np.sort(np.array(test, dtype=int))
    train = np.setdiff1d(np.arange(n), test)
    return train, test


@dataclass
class FoldResult:
    predictions: np.ndarray
    probabilities: np.ndarray | None
    skipped: list[int] = field(default_factory=list)

    @property
    def evaluated(self) -> np.ndarray:
        return np.array([i for i in range(len(self.predictions)) if i not in self.skipped], dtype=int)


def _positive_proba(model, x):
    if isinstance(model, LRModel):
        p = predict_proba(model, x)
        return float(p) if model.is_binary else float("nan")
    return float("nan")


def loocv(X, y, learner: LearnerSpec, seed: int = 0, workers: int = 1) -> FoldResult:
    """Hold out each sample in turn, train on the rest, predict it.

    Folds whose training labels collapse to one class are skipped with a
    warning; their prediction is -1. Each fold gets its own derived seed.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    n = len(y)
    if n < 2:
        raise DataError("need at least 2 samples for leave-one-out")
    if len(np.unique(y)) < 2:
        raise DataError("leave-one-out needs at least 2 classes overall")
    seeds = derive_seeds(seed, n)

    def run(i):
        mask = np.arange(n) != i
        if len(np.unique(y[mask])) < 2:
            return None
        model = fit(learner, X[mask], y[mask], seed=seeds[i])
        return int(predict(model, X[i:i + 1])[0]), _positive_proba(model, X[i])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(n)))
    else:
        results = [run(i) for i in range(n)]
    preds = np.full(n, -1, dtype=int)
    probs = np.full(n, np.nan)
    skipped = []
    for i, r in enumerate(results):
        if r is None:
            warnings.warn(f"fold {i}: training set has a single class; skipped", stacklevel=2)
            skipped.append(i)
        else:
            preds[i], probs[i] = r
    return FoldResult(preds, probs if learner.kind == "logistic" else None, skipped)


@dataclass
class ConfusionMatrix:
    """Full K x K counts (rows true, columns predicted) and one-vs-rest views."""
    classes: tuple[int, ...]
    matrix: np.ndarray

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def tp(self) -> np.ndarray:
        return np.diag(self.matrix).copy()

    @property
    def fp(self) -> np.ndarray:
        return self.matrix.sum(axis=0) - self.tp

    @property
    def fn(self) -> np.ndarray:
        return self.matrix.sum(axis=1) - self.tp

    @property
    def tn(self) -> np.ndarray:
        return self.total - self.tp - self.fp - self.fn

    @property
    def support(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    def counts(self, cls) -> dict[str, int]:
        i = self.classes.index(cls)
        return {"TP": int(self.tp[i]), "FP": int(self.fp[i]), "FN": int(self.fn[i]), "TN": int(self.tn[i])}

    @classmethod
    def from_binary_counts(cls, tp: int, tn: int, fp: int, fn: int) -> "ConfusionMatrix":
        """Two-class matrix with class 1 as the positive class."""
        return cls((0, 1), np.array([[tn, fp], [fn, tp]]))


def confusion(y_true, y_pred, classes: Sequence[int]) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise DataError("y_true and y_pred differ in length")
    classes = tuple(int(c) for c in classes)
    index = {c: i for i, c in enumerate(classes)}
    m = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        if int(t) not in index or int(p) not in index:
            raise DataError(f"label outside class list {classes}: true={t}, pred={p}")
        m[index[int(t)], index[int(p)]] += 1
    return ConfusionMatrix(classes, m)


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str

    def as_dict(self) -> dict[str, float]:
        return {m: getattr(self, m) for m in METRIC_NAMES}


def _ratio(num, den, what):
    if den == 0:
        warnings.warn(f"{what} undefined (zero denominator); reported as 0", stacklevel=3)
        return 0.0
    return num / den


def _f1(p, r):
    return 0.0 if p + r == 0 else 2 * (p * r) / (p + r)


def metrics(cm: ConfusionMatrix, averaging: str = "weighted", positive: int = 1) -> MetricsReport:
    """Accuracy, precision, recall and F1.

    ``binary`` scores the ``positive`` class with accuracy (TP+TN)/total.
    ``weighted`` averages one-vs-rest scores with class-support weights;
    its recall is sum(TP)/total, which is exactly the accuracy.
    """
    n = cm.total
    if n == 0:
        raise DataError("no predictions to score")
    if averaging == "binary":
        if len(cm.classes) != 2:
            raise DataError("binary averaging needs exactly 2 classes")
        c = cm.counts(positive)
        acc = (c["TP"] + c["TN"]) / (c["FP"] + c["FN"] + c["TP"] + c["TN"])
        prec = _ratio(c["TP"], c["TP"] + c["FP"], "precision")
        rec = _ratio(c["TP"], c["FN"] + c["TP"], "recall")
        return MetricsReport(acc, prec, rec, _f1(prec, rec), averaging)
    if averaging != "weighted":
        raise DataError(f"unknown averaging {averaging!r}")
    tp, fp, support = cm.tp, cm.fp, cm.support
    acc = tp.sum() / n
    prec_k = np.zeros(len(cm.classes))
    rec_k = np.zeros(len(cm.classes))
    for k in range(len(cm.classes)):
        if support[k] == 0:
            continue
        prec_k[k] = _ratio(tp[k], tp[k] + fp[k], f"precision of class {cm.classes[k]}")
        rec_k[k] = tp[k] / support[k]
    f1_k = np.array([_f1(p, r) for p, r in zip(prec_k, rec_k)])
    prec = float(support @ prec_k) / n
    rec = float(tp.sum()) / n
    f1 = float(support @ f1_k) / n
    return MetricsReport(float(acc), prec, rec, f1, averaging)


@dataclass(frozen=True)
class Aggregate:
    mean: float
    sem: float
    n_runs: int


RunAggregate = dict  # metric name -> Aggregate


def aggregate(values: Sequence[float]) -> Aggregate:
    """Mean and standard error (sample std with n-1, over sqrt(n)).

    A single run, or identical runs, give sem 0.
    """
    v = np.asarray(values, dtype=float)
    if len(v) == 0:
        raise DataError("no runs to aggregate")
    if len(v) == 1 or np.all(v == v[0]):
        return Aggregate(float(v[0]), 0.0, len(v))
    return Aggregate(float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))), len(v))


def aggregate_runs(runs: Sequence[MetricsReport] | Mapping[str, Sequence[float]]) -> dict[str, Aggregate]:
    if isinstance(runs, Mapping):
        return {k: aggregate(v) for k, v in runs.items()}
    return {m: aggregate([getattr(r, m) for r in runs]) for m in METRIC_NAMES}


def random_baseline(labels: Sequence[int], n_runs: int = 20, seed: int = 0,
                    classes: Sequence[int] | None = None) -> dict[str, Aggregate]:
    """Score uniform random guessing over the class set, ``n_runs`` times."""
    if n_runs < 1:
        raise DataError("n_runs must be >= 1")
    labels = np.asarray(labels)
    classes = tuple(int(c) for c in (classes if classes is not None else np.unique(labels)))
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(n_runs):
        guess = np.asarray(classes)[rng.integers(0, len(classes), size=len(labels))]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            reports.append(metrics(confusion(labels, guess, classes), "weighted"))
    return aggregate_runs(reports)


@dataclass(frozen=True)
class SignificanceResult:
    z: float
    p_value: float
    sem_choice: str


def z_test(model: Aggregate, baseline: Aggregate, sem_choice: str = "model_runs") -> SignificanceResult:
    """One-tailed test that the model's mean exceeds the baseline's.

    ``model_runs`` divides the mean difference by the model's sem;
    ``pooled`` by sqrt(sem_model**2 + sem_baseline**2).
    """
    if sem_choice == "model_runs":
        sem = model.sem
    elif sem_choice == "pooled":
        sem = math.hypot(model.sem, baseline.sem)
    else:
        raise DataError(f"unknown sem_choice {sem_choice!r}")
    diff = model.mean - baseline.mean
    if sem == 0:
        warnings.warn("sem is zero; z is infinite", stacklevel=2)
        z = math.copysign(math.inf, diff) if diff != 0 else 0.0
    else:
        z = diff / sem
    p = 0.5 * math.erfc(z / math.sqrt(2.0)) if math.isfinite(z) else (0.0 if z > 0 else 1.0)
    return SignificanceResult(z, p, sem_choice)


# --- repeated evaluation -----------------------------------------------------

@dataclass
class PredictionRecord:
    run: int
    fold: int
    country: str
    true: int
    pred: int
    p: float


@dataclass
class Evaluation:
    model: str
    scheme: str
    aggregate: dict[str, Aggregate]
    runs: list[MetricsReport]
    log: list[PredictionRecord]


def evaluate(
    X, y, countries: Sequence[str], learner: LearnerSpec, scheme: str = "loocv",
    n_runs: int = 20, seed: int = 0, workers: int = 1,
) -> Evaluation:
    """Repeat a full evaluation ``n_runs`` times with fresh derived seeds.

    ``scheme`` is ``loocv`` (one pass per run) or ``split`` (one stratified
    80/20 split per run). Metrics use weighted averaging.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    classes = tuple(int(c) for c in np.unique(y))
    reports, records = [], []
    for run, run_seed in enumerate(derive_seeds(seed, n_runs)):
        if scheme == "loocv":
            res = loocv(X, y, learner, seed=run_seed, workers=workers)
            idx = res.evaluated
            y_pred = res.predictions[idx]
            probs = res.probabilities[idx] if res.probabilities is not None else np.full(len(idx), np.nan)
            folds = idx
        elif scheme == "split":
            train, test = split_80_20(y, seed=run_seed)
            model = fit(learner, X[train], y[train], seed=run_seed, workers=workers)
            y_pred = np.asarray(predict(model, X[test]))
            probs = np.array([_positive_proba(model, X[i]) for i in test])
            idx, folds = test, np.zeros(len(test), dtype=int)
        else:
            raise DataError(f"unknown scheme {scheme!r}")
        reports.append(metrics(confusion(y[idx], y_pred, classes), "weighted"))
        for f, i, yp, p in zip(folds, idx, y_pred, probs):
            records.append(PredictionRecord(run, int(f), countries[i], int(y[i]), int(yp), float(p)))
    return Evaluation(learner.kind, scheme, aggregate_runs(reports), reports, records)


def write_report_csv(path: str | Path, rows: Sequence[tuple[str, str, dict[str, Aggregate]]]) -> None:
    """Table of (model, scheme, per-metric mean and sem)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "scheme", *(f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "sem")), "n_runs"])
        for model, scheme, agg in rows:
            vals = [f"{getattr(agg[m], s):.3f}" for m in METRIC_NAMES for s in ("mean", "sem")]
            w.writerow([model, scheme, *vals, agg["accuracy"].n_runs])


def write_prediction_log(path: str | Path, records: Sequence[PredictionRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run", "fold", "country", "true", "pred", "p"])
        for r in records:
            w.writerow([r.run, r.fold, r.country, r.true, r.pred, "" if math.isnan(r.p) else repr(r.p)])
