"""Multinomial logistic regression and multinomial naive Bayes.

The logistic model trains by full-batch gradient descent on
class-weighted cross-entropy with an L2 penalty on the weight matrix
(bias unregularized), from a zero initialization. Naive Bayes expects
nonnegative features (TF-IDF style) and applies Laplace smoothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..errors import NegativeFeature, NonFiniteFeature, NonFiniteLoss, SingleClass


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class LinearModel:
    classes: tuple[str, ...]
    W: np.ndarray  # (K, d)
    b: np.ndarray  # (K,)
    l2: float
    seed: int

    model_kind = "logreg"

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.W.T + self.b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_scores(X))


def train_logreg(
    X: np.ndarray,
    y: list[str] | np.ndarray,
    l2: float = 0.0,
    lr: float = 0.1,
    epochs: int = 200,
    class_weights: Mapping[str, float] | None = None,
    seed: int = 0,
) -> LinearModel:
    """Gradient descent on weighted multinomial cross-entropy + (l2/2)||W||^2.

    Raises:
        SingleClass, NonFiniteFeature, NonFiniteLoss (diverging lr).
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("X contains non-finite entries")
    y = list(y)
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise SingleClass("need at least 2 classes")
    n, d = X.shape
    K = len(classes)
    class_index = {c: k for k, c in enumerate(classes)}
    y_idx = np.asarray([class_index[c] for c in y])
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y_idx] = 1.0
    w = np.asarray(
        [1.0 if class_weights is None else class_weights[c] for c in y], dtype=float
    )
    w_total = w.sum()

    W = np.zeros((K, d))
    b = np.zeros(K)
    for _ in range(epochs):
        P = _softmax(X @ W.T + b)
        G = (P - onehot) * w[:, None] / w_total  # (n, K)
        grad_W = G.T @ X + l2 * W
        grad_b = G.sum(axis=0)
        W -= lr * grad_W
        b -= lr * grad_b
        loss = (
            -(w * np.log(np.clip(P[np.arange(n), y_idx], 1e-300, None))).sum() / w_total
            + 0.5 * l2 * float((W * W).sum())
        )
        if not np.isfinite(loss) or not np.all(np.isfinite(W)):
            raise NonFiniteLoss("logistic regression diverged; lower lr")
    return LinearModel(classes=classes, W=W, b=b, l2=l2, seed=seed)


@dataclass
class NaiveBayesModel:
    classes: tuple[str, ...]
    log_priors: np.ndarray       # (K,)
    log_likelihoods: np.ndarray  # (K, d)
    alpha: float

    model_kind = "naive_bayes"

    @property
    def n_features(self) -> int:
        return self.log_likelihoods.shape[1]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.log_likelihoods.T + self.log_priors

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_scores(X))


def train_naive_bayes(
    X: np.ndarray, y: list[str] | np.ndarray, alpha: float = 1.0
) -> NaiveBayesModel:
    """Multinomial NB with Laplace smoothing alpha.

    log P(feature j | class k) = ln((sum_{i in k} x_ij + alpha) /
    (sum_j sum_{i in k} x_ij + alpha d)).

    Raises:
        SingleClass, NegativeFeature.
    """
    X = np.asarray(X, dtype=float)
    if (X < 0).any():
        raise NegativeFeature("multinomial NB requires nonnegative features")
    y = list(y)
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise SingleClass("need at least 2 classes")
    n, d = X.shape
    K = len(classes)
    class_index = {c: k for k, c in enumerate(classes)}
    y_idx = np.asarray([class_index[c] for c in y])

    log_priors = np.zeros(K)
    log_lik = np.zeros((K, d))
    for k in range(K):
        rows = X[y_idx == k]
        log_priors[k] = np.log(len(rows) / n)
        feature_mass = rows.sum(axis=0)
        log_lik[k] = np.log((feature_mass + alpha) / (feature_mass.sum() + alpha * d))
    return NaiveBayesModel(
        classes=classes, log_priors=log_priors, log_likelihoods=log_lik, alpha=alpha
    )


@dataclass
class DummyPriorModel:
    """Predicts the (weighted) training class priors for every input."""

    classes: tuple[str, ...]
    priors: np.ndarray
    feature_count: int

    model_kind = "dummy"

    @property
    def n_features(self) -> int:
        return self.feature_count

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return np.tile(self.priors, (X.shape[0], 1))


def train_dummy(
    X: np.ndarray, y: list[str] | np.ndarray, class_weights: Mapping[str, float] | None = None
) -> DummyPriorModel:
    y = list(y)
    classes = tuple(sorted(set(y)))
    w = np.asarray(
        [1.0 if class_weights is None else class_weights[c] for c in y], dtype=float
    )
    priors = np.asarray(
        [w[[lab == c for lab in y]].sum() for c in classes], dtype=float
    )
    priors /= priors.sum()
    return DummyPriorModel(
        classes=classes, priors=priors, feature_count=np.asarray(X).shape[1]
    )
