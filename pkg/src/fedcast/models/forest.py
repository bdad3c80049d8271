"""Random forest and extra-trees classifiers.

``rf`` mode bootstraps rows per tree and searches the best Gini split
over a sqrt-d candidate feature subset; ``extra`` mode keeps the full
sample and draws one uniform threshold per candidate feature. Leaves
store class histograms and prediction averages them over trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteFeature, SingleClass
from .trees import Tree, grow_classification_tree

MODES = ("rf", "extra")


@dataclass
class ForestModel:
    classes: tuple[str, ...]
    trees: list[Tree]
    mode: str
    feature_count: int
    seed: int
    max_depth: int | None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    max_features: str | int | None = "sqrt"

    model_kind = "forest"

    @property
    def n_features(self) -> int:
        return self.feature_count

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        acc = np.zeros((X.shape[0], len(self.classes)))
        for tree in self.trees:
            acc += tree.predict(X)
        return acc / len(self.trees)


def train_random_forest(
    X: np.ndarray,
    y: list[str] | np.ndarray,
    mode: str = "rf",
    n_trees: int = 100,
    max_depth: int | None = None,
    seed: int = 0,
    min_samples_leaf: int = 1,
    min_samples_split: int = 2,
    max_features: str | int | None = "sqrt",
) -> ForestModel:
    """Fit a bagged tree ensemble.

    Raises:
        SingleClass, NonFiniteFeature.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("X contains non-finite entries")
    y = list(y)
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise SingleClass("need at least 2 classes")
    class_index = {c: k for k, c in enumerate(classes)}
    y_idx = np.asarray([class_index[c] for c in y])
    n = X.shape[0]

    ss = np.random.SeedSequence(seed)
    tree_seeds = ss.spawn(n_trees)
    trees: list[Tree] = []
    for t in range(n_trees):
        rng = np.random.default_rng(tree_seeds[t])
        if mode == "rf":
            rows = rng.integers(0, n, size=n)
        else:
            rows = np.arange(n)
        trees.append(
            grow_classification_tree(
                X[rows],
                y_idx[rows],
                n_classes=len(classes),
                rng=rng,
                max_depth=max_depth,
                min_samples_split=min_samples_split,
                min_samples_leaf=min_samples_leaf,
                max_features=max_features,
                random_thresholds=(mode == "extra"),
            )
        )

    return ForestModel(
        classes=classes,
        trees=trees,
        mode=mode,
        feature_count=X.shape[1],
        seed=seed,
        max_depth=max_depth,
        min_samples_leaf=min_samples_leaf,
        min_samples_split=min_samples_split,
        max_features=max_features,
    )
