"""L2-regularized logistic regression (binary and multinomial) trained by gradient descent."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import DataError, NumericError

ARMIJO_C = 1e-4
MAX_HALVINGS = 60


@dataclass(frozen=True)
class LRHyper:
    l2_strength: float = 1.0
    tol: float = 1e-8
    max_iter: int = 5000
    standardize: bool = True

    def __post_init__(self):
        if self.l2_strength < 0:
            raise DataError("l2_strength must be >= 0")
        if self.max_iter < 1:
            raise DataError("max_iter must be >= 1")


@dataclass
class LRModel:
    """Fitted parameters.

    Binary models keep ``weights`` of shape (d,) and a scalar ``bias``; the
    probability refers to ``classes[1]``. Multinomial models keep (K, d) and (K,).
    """
    classes: tuple[int, ...]
    weights: np.ndarray
    bias: np.ndarray | float
    mean: np.ndarray | None
    scale: np.ndarray | None
    hyper: LRHyper = field(default_factory=LRHyper)
    n_iter: int = 0
    converged: bool = False
    loss_trace: list[float] = field(default_factory=list, repr=False)

    @property
    def is_binary(self) -> bool:
        return len(self.classes) == 2

    @property
    def n_features(self) -> int:
        return self.weights.shape[-1]

    def params(self) -> np.ndarray:
        return np.concatenate([np.ravel(self.weights), np.ravel(self.bias)])

    def with_params(self, theta: np.ndarray) -> "LRModel":
        d, k = self.n_features, len(self.classes)
        if self.is_binary:
            return replace(self, weights=theta[:d].copy(), bias=float(theta[d]))
        return replace(self, weights=theta[: k * d].reshape(k, d).copy(), bias=theta[k * d:].copy())

    def transform(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.n_features:
            raise DataError(f"expected {self.n_features} features, got {X.shape[-1]}")
        if self.mean is None:
            return X
        return (X - self.mean) / self.scale


def _sigmoid(z):
    # exp of a non-positive argument only, so no overflow warnings
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _loss_grad(theta, Xs, y_idx, n_classes, l2):
    """Regularized negative log-likelihood and its gradient at ``theta``.

    ``Xs`` is already standardized; ``y_idx`` holds class positions 0..K-1.
    """
    n, d = Xs.shape
    if n_classes == 2:
        w, b = theta[:d], theta[d]
        z = Xs @ w + b
        # softplus of the signed margin avoids cancellation when z is large
        loss = np.sum(np.logaddexp(0.0, (1.0 - 2.0 * y_idx) * z)) + 0.5 * l2 * (w @ w)
        r = _sigmoid(z) - y_idx
        grad = np.empty_like(theta)
        grad[:d] = Xs.T @ r + l2 * w
        grad[d] = r.sum()
        return float(loss), grad
    W = theta[: n_classes * d].reshape(n_classes, d)
    b = theta[n_classes * d:]
    Z = Xs @ W.T + b
    rows = np.arange(n)
    D = Z - Z[rows, y_idx][:, None]
    m = D.max(axis=1)
    E = np.exp(D - m[:, None])
    E[rows, y_idx] = 0.0
    rest = E.sum(axis=1)
    # log1p keeps precision when the true class already dominates (m == 0)
    nll = np.where(m == 0.0, np.log1p(rest), m + np.log(np.exp(-m) + rest))
    loss = np.sum(nll) + 0.5 * l2 * np.sum(W * W)
    R = _softmax(Z)
    R[rows, y_idx] -= 1.0
    grad = np.concatenate([(R.T @ Xs + l2 * W).ravel(), R.sum(axis=0)])
    return float(loss), grad


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) != len(y):
        raise DataError(f"X must be 2-D with one row per label; got {X.shape} and {len(y)} labels")
    if not np.all(np.isfinite(X)):
        raise DataError("features contain non-finite values")
    return X, y


def _standardization(X, enabled):
    if not enabled:
        return None, None
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    # constant columns carry no information; unit scale keeps them at zero
    scale[scale == 0] = 1.0
    return mean, scale


def train_logistic(X, y, hyper: LRHyper | None = None) -> LRModel:
    """Fit by full-batch gradient descent from zero weights.

    Each step starts from a Barzilai-Borwein step length and halves it until
    the Armijo sufficient-decrease test passes, so the loss never increases.
    Stops when the largest gradient component drops below ``hyper.tol``.
    Output depends only on the inputs.
    """
    hyper = hyper or LRHyper()
    X, y = _check_xy(X, y)
    classes = tuple(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise DataError("training labels contain a single class")
    if len(classes) > 3:
        raise DataError(f"at most 3 classes supported, got {len(classes)}")
    y_idx = np.searchsorted(classes, y)
    mean, scale = _standardization(X, hyper.standardize)
    Xs = X if mean is None else (X - mean) / scale
    k = len(classes)
    n_params = X.shape[1] + 1 if k == 2 else k * (X.shape[1] + 1)

    theta = np.zeros(n_params)
    loss, grad = _loss_grad(theta, Xs, y_idx, k, hyper.l2_strength)
    trace = [loss]
    step = 1.0 / max(1.0, float(np.abs(grad).max()))
    prev_theta = prev_grad = None
    converged = False
    it = 0
    while it < hyper.max_iter:
        if np.abs(grad).max() < hyper.tol:
            converged = True
            break
        if prev_theta is not None:
            s = theta - prev_theta
            yv = grad - prev_grad
            sy = float(s @ yv)
            if sy > 0:
                step = float(s @ s) / sy
        gg = float(grad @ grad)
        for _ in range(MAX_HALVINGS):
            cand = theta - step * grad
            cand_loss, cand_grad = _loss_grad(cand, Xs, y_idx, k, hyper.l2_strength)
            if cand_loss <= loss - ARMIJO_C * step * gg:
                break
            step *= 0.5
        else:
            # no representable decrease left along the gradient
            break
        if not np.isfinite(cand_loss):
            raise NumericError("logistic loss became non-finite")
        if cand_loss >= loss:
            # loss is flat to machine precision
            break
        prev_theta, prev_grad = theta, grad
        theta, loss, grad = cand, cand_loss, cand_grad
        trace.append(loss)
        it += 1
    converged = converged or bool(np.abs(grad).max() < hyper.tol)

    d = X.shape[1]
    if k == 2:
        weights, bias = theta[:d].copy(), float(theta[d])
    else:
        weights, bias = theta[: k * d].reshape(k, d).copy(), theta[k * d:].copy()
    return LRModel(classes, weights, bias, mean, scale, hyper, it, converged, trace)


def lr_loss(model: LRModel, X, y) -> float:
    """Regularized NLL of ``model``'s parameters on (X, y)."""
    X, y = _check_xy(X, y)
    y_idx = np.searchsorted(model.classes, y)
    return _loss_grad(model.params(), model.transform(X), y_idx, len(model.classes), model.hyper.l2_strength)[0]


def lr_gradient(model: LRModel, X, y) -> np.ndarray:
    """Analytic gradient of :func:`lr_loss`, ordered like ``model.params()``."""
    X, y = _check_xy(X, y)
    y_idx = np.searchsorted(model.classes, y)
    return _loss_grad(model.params(), model.transform(X), y_idx, len(model.classes), model.hyper.l2_strength)[1]


def predict_proba(model: LRModel, X):
    """Binary: probability of ``classes[1]``. Multinomial: one probability per class.

    A single 1-D row gives a scalar (binary) or a (K,) vector.
    """
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    Xs = model.transform(np.atleast_2d(X))
    if model.is_binary:
        p = _sigmoid(Xs @ model.weights + model.bias)
        return float(p[0]) if single else p
    P = _softmax(Xs @ model.weights.T + model.bias)
    return P[0] if single else P


def lr_predict(model: LRModel, X) -> np.ndarray:
    P = predict_proba(model, np.atleast_2d(X))
    classes = np.asarray(model.classes)
    if model.is_binary:
        return np.where(P >= 0.5, classes[1], classes[0])
    return classes[np.argmax(P, axis=1)]
