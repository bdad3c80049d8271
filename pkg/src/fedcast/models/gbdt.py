"""Multinomial gradient boosting with Newton-step leaves.

Standard K-class boosting: per-class scores start at the log class
priors, and each iteration fits one variance-reduction regression tree
per class to the softmax residuals ``1{y=k} - p_k``. Leaves hold the
K-class Newton step

    value = (K-1)/K * sum(w r) / sum(w |r| (1 - |r|))

and are scaled by the learning rate when scores accumulate. Candidate
features are re-drawn per split (``max_features='sqrt'`` convention).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteFeature, SingleClass
from .trees import Tree, grow_regression_tree


@dataclass(frozen=True)
class GbdtParams:
    n_estimators: int = 10
    learning_rate: float = 0.01
    max_depth: int = 4
    max_features: str | int | None = "sqrt"
    min_samples_leaf: int = 10
    min_samples_split: int = 10

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "max_features": self.max_features,
            "min_samples_leaf": self.min_samples_leaf,
            "min_samples_split": self.min_samples_split,
        }


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class GbdtModel:
    classes: tuple[str, ...]
    f0: np.ndarray                      # (K,) log priors
    trees: list[list[Tree]]             # trees[m][k]
    params: GbdtParams
    feature_count: int
    seed: int
    train_deviance: tuple[float, ...] = field(default_factory=tuple)

    model_kind = "gbdt"

    @property
    def n_features(self) -> int:
        return self.feature_count

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        """Pre-softmax margins F(x), shape (n, K)."""
        F = np.tile(self.f0, (X.shape[0], 1))
        lr = self.params.learning_rate
        for stage in self.trees:
            for k, tree in enumerate(stage):
                F[:, k] += lr * tree.predict(X)[:, 0]
        return F

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_scores(X))


def train_gbdt(
    X: np.ndarray,
    y: list[str] | np.ndarray,
    sample_weights: np.ndarray | None = None,
    params: GbdtParams = GbdtParams(),
    seed: int = 0,
) -> GbdtModel:
    """Fit the boosted ensemble.

    ``sample_weights`` multiply every residual sum (split search, leaf
    values, priors, deviance); duplicating a row and doubling its
    weight are equivalent at depth 0.

    Raises:
        SingleClass: fewer than 2 classes in y.
        NonFiniteFeature: X contains NaN or infinity.
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

    w = np.ones(n) if sample_weights is None else np.asarray(sample_weights, dtype=float)
    if w.shape != (n,) or (w < 0).any() or w.sum() <= 0:
        raise ValueError("sample_weights must be nonnegative with positive sum")

    onehot = np.zeros((n, K))
    onehot[np.arange(n), y_idx] = 1.0
    priors = (w[:, None] * onehot).sum(axis=0) / w.sum()
    f0 = np.log(priors)

    ss = np.random.SeedSequence(seed)
    tree_seeds = ss.spawn(params.n_estimators * K)

    F = np.tile(f0, (n, 1))
    w_total = w.sum()
    factor = (K - 1) / K
    trees: list[list[Tree]] = []
    deviance: list[float] = []

    for m in range(params.n_estimators):
        P = _softmax(F)
        stage: list[Tree] = []
        for k in range(K):
            r = onehot[:, k] - P[:, k]

            def newton_leaf(indices: np.ndarray) -> float:
                rr = r[indices]
                ww = w[indices]
                denom = float((ww * np.abs(rr) * (1.0 - np.abs(rr))).sum())
                if denom < 1e-150:
                    return 0.0
                return factor * float((ww * rr).sum()) / denom

            rng = np.random.default_rng(tree_seeds[m * K + k])
            tree = grow_regression_tree(
                X,
                target=r,
                weight=w,
                rng=rng,
                max_depth=params.max_depth,
                min_samples_split=params.min_samples_split,
                min_samples_leaf=params.min_samples_leaf,
                max_features=params.max_features,
                leaf_value_fn=newton_leaf,
            )
            stage.append(tree)
            F[:, k] += params.learning_rate * tree.predict(X)[:, 0]
        trees.append(stage)
        P = _softmax(F)
        log_py = np.log(np.clip(P[np.arange(n), y_idx], 1e-300, None))
        deviance.append(float(-(w * log_py).sum() / w_total))

    return GbdtModel(
        classes=classes,
        f0=f0,
        trees=trees,
        params=params,
        feature_count=d,
        seed=seed,
        train_deviance=tuple(deviance),
    )
