"""Random forest of Gini CART trees, with mean-decrease-in-impurity importances."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class RFHyper:
    n_trees: int = 100
    max_features: str | int = "sqrt"
    min_samples_leaf: int = 1
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise DataError("n_trees must be >= 1")
        if self.min_samples_leaf < 1:
            raise DataError("min_samples_leaf must be >= 1")

    def n_candidates(self, n_features: int) -> int:
        if self.max_features == "sqrt":
            m = math.ceil(math.sqrt(n_features))
        elif self.max_features == "all":
            m = n_features
        elif isinstance(self.max_features, int) and self.max_features >= 1:
            m = self.max_features
        else:
            raise DataError(f"bad max_features {self.max_features!r}")
        return min(m, n_features)


@dataclass
class Tree:
    """Flattened binary tree; leaves have ``feature == -1``.

    ``value`` holds per-node class counts of the training samples reaching it.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    impurity: np.ndarray
    n_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, x: np.ndarray) -> int:
        node = 0
        while self.feature[node] >= 0:
            node = self.left[node] if x[self.feature[node]] <= self.threshold[node] else self.right[node]
        return node

    def predict(self, x: np.ndarray) -> int:
        # argmax takes the first maximum, so ties go to the lower class index
        return int(np.argmax(self.value[self.apply(x)]))


@dataclass
class RFModel:
    classes: tuple[int, ...]
    n_features: int
    trees: list[Tree]
    hyper: RFHyper = field(default_factory=RFHyper)
    seed: int = 0


def gini(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts / n
    return float(1.0 - p @ p)


def _best_split(X, y, feats, n_classes, min_leaf):
    """Lowest weighted child impurity over midpoint thresholds of ``feats``.

    Returns (feature, threshold) or None. Ties prefer the smaller feature
    index, then the smaller threshold.
    """
    n = len(y)
    V = X[:, feats]
    order = np.argsort(V, axis=0, kind="stable")
    Vs = np.take_along_axis(V, order, axis=0)
    Ys = y[order]
    onehot = (Ys[:, :, None] == np.arange(n_classes)).astype(float)
    left = np.cumsum(onehot, axis=0)[:-1]
    total = left[-1] + onehot[-1]
    right = total - left
    nl = np.arange(1, n, dtype=float)[:, None]
    nr = n - nl
    gl = 1.0 - np.sum((left / nl[..., None]) ** 2, axis=2)
    gr = 1.0 - np.sum((right / nr[..., None]) ** 2, axis=2)
    weighted = (nl * gl + nr * gr) / n
    valid = (Vs[:-1] < Vs[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not valid.any():
        return None
    weighted = np.where(valid, weighted, np.inf)
    best = weighted.min()
    rows, cols = np.nonzero(weighted == best)
    thr = (Vs[rows, cols] + Vs[rows + 1, cols]) / 2.0
    # a midpoint that rounds up to the right value would send it left
    thr = np.where(thr == Vs[rows + 1, cols], Vs[rows, cols], thr)
    f = np.asarray(feats)[cols]
    pick = np.lexsort((thr, f))[0]
    return int(f[pick]), float(thr[pick])


def build_tree(X, y, n_classes, hyper: RFHyper, rng: np.random.Generator) -> Tree:
    """Grow one CART tree on (X, y) until leaves are pure or unsplittable."""
    n, d = X.shape
    m = hyper.n_candidates(d)
    feature, threshold, left, right, value, impurity, n_samples = [], [], [], [], [], [], []

    def new_node(idx):
        counts = np.bincount(y[idx], minlength=n_classes).astype(float)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts)
        impurity.append(gini(counts))
        n_samples.append(len(idx))
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n))]
    while stack:
        node, idx = stack.pop()
        if impurity[node] == 0.0 or len(idx) < 2 * hyper.min_samples_leaf:
            continue
        feats = np.sort(rng.choice(d, size=m, replace=False))
        split = _best_split(X[idx], y[idx], feats, n_classes, hyper.min_samples_leaf)
        if split is None:
            continue
        f, t = split
        go_left = X[idx, f] <= t
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, t
        left[node] = new_node(li)
        right[node] = new_node(ri)
        # pop order makes node numbering depth-first, left subtree first
        stack.append((right[node], ri))
        stack.append((left[node], li))
    return Tree(
        np.array(feature, dtype=int), np.array(threshold), np.array(left, dtype=int),
        np.array(right, dtype=int), np.array(value), np.array(impurity), np.array(n_samples, dtype=int),
    )


def tree_seeds(seed: int, n_trees: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(n_trees)


def train_forest(X, y, hyper: RFHyper | None = None, seed: int = 0, workers: int = 1) -> RFModel:
    """Bagged CART trees, each on its own bootstrap sample and sub-seed.

    Trees are stored in index order, so ``workers`` only changes wall time.
    """
    hyper = hyper or RFHyper()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError("X must be 2-D with one row per label")
    if len(y) < 2:
        raise DataError("need at least 2 samples")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise DataError("training labels contain a single class")
    y_idx = np.searchsorted(classes, y)
    n = len(y)
    seeds = tree_seeds(seed, hyper.n_trees)

    def grow(i):
        rng = np.random.default_rng(seeds[i])
        rows = rng.integers(0, n, size=n) if hyper.bootstrap else np.arange(n)
        return build_tree(X[rows], y_idx[rows], len(classes), hyper, rng)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(grow, range(hyper.n_trees)))
    else:
        trees = [grow(i) for i in range(hyper.n_trees)]
    return RFModel(classes, X.shape[1], trees, hyper, seed)


def rf_votes(model: RFModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_features,):
        raise DataError(f"expected {model.n_features} features, got shape {x.shape}")
    votes = np.zeros(len(model.classes), dtype=int)
    for tree in model.trees:
        votes[tree.predict(x)] += 1
    return votes


def rf_predict(model: RFModel, X):
    """Majority vote over trees; a tied vote goes to the lower class index."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        return model.classes[int(np.argmax(rf_votes(model, X)))]
    return np.array([model.classes[int(np.argmax(rf_votes(model, x)))] for x in X])


def tree_importance(tree: Tree, n_features: int) -> np.ndarray:
    """Unnormalized weighted impurity decrease per feature."""
    imp = np.zeros(n_features)
    for node in np.nonzero(tree.feature >= 0)[0]:
        l, r = tree.left[node], tree.right[node]
        imp[tree.feature[node]] += (
            tree.n_samples[node] * tree.impurity[node]
            - tree.n_samples[l] * tree.impurity[l]
            - tree.n_samples[r] * tree.impurity[r]
        )
    return imp


def gini_importance(model: RFModel) -> np.ndarray:
    """Mean over trees of each tree's normalized impurity decrease, renormalized to sum 1.

    All zeros when no tree has a split.
    """
    total = np.zeros(model.n_features)
    for tree in model.trees:
        imp = tree_importance(tree, model.n_features)
        s = imp.sum()
        if s > 0:
            total += imp / s
    total /= len(model.trees)
    s = total.sum()
    return total / s if s > 0 else total
