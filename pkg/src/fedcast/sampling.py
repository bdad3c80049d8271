"""Splits, stratified cross-validation, SMOTE, and class weights.

The default protocol is a chronological 80/20 holdout (most recent
meetings become the test set) with stratified k-fold cross-validation
inside the training portion. SMOTE is only ever applied to a fold's
training rows, never to validation or test rows, so synthetic points
cannot leak into any evaluation. All operations are deterministic
given a seed and the input order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ClassTooSmall, KTooLarge, MissingClass, TooFewRows


@dataclass(frozen=True)
class SplitPlan:
    """Holdout plus CV fold indices, serializable for audits."""

    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    folds: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]

    def __post_init__(self):
        if set(self.train_indices) & set(self.test_indices):
            raise ValueError("train and test indices overlap")
        val_union: list[int] = []
        for train, val in self.folds:
            if set(train) & set(val):
                raise ValueError("fold train and validation overlap")
            val_union.extend(val)
        if self.folds and sorted(val_union) != sorted(self.train_indices):
            raise ValueError("fold validation sets must partition the train indices")

    def to_json(self) -> str:
        return json.dumps(
            {
                "train_indices": list(self.train_indices),
                "test_indices": list(self.test_indices),
                "folds": [
                    {"train": list(tr), "validation": list(va)} for tr, va in self.folds
                ],
            },
            indent=2,
            sort_keys=True,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def chronological_split(
    n_rows: int, test_fraction: float = 0.2
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Reserve the last ceil(n * fraction) rows (by date order) as test.

    Raises:
        TooFewRows: fewer than 5 rows.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if n_rows < 5:
        raise TooFewRows(f"need at least 5 rows, got {n_rows}")
    n_test = math.ceil(n_rows * test_fraction)
    split = n_rows - n_test
    return tuple(range(split)), tuple(range(split, n_rows))


def stratified_kfold(
    labels: Sequence[str], k: int = 5, seed: int = 0
) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    """Stratified folds: per class, shuffle then deal round-robin.

    Per-fold class counts deviate from the proportional share by less
    than 1. Identical seeds give identical folds.

    Raises:
        KTooLarge: k < 2 (no validation possible) or k > n.
    """
    labels = list(labels)
    n = len(labels)
    if k < 2 or k > n:
        raise KTooLarge(f"k={k} invalid for {n} rows")
    rng = np.random.default_rng(seed)
    fold_members: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(labels)):
        members = [i for i, y in enumerate(labels) if y == cls]
        order = rng.permutation(len(members))
        for  j, pos in enumerate(order):
            fold_members[j % k].append(members[pos])

    folds = []
    all_indices = set(range(n))
    for f in range(k):
        val = tuple(sorted(fold_members[f]))
        train = tuple(sorted(all_indices - set(val)))
        folds.append((train, val))
    return tuple(folds)


def smote_resample(
    features: np.ndarray,
    labels: Sequence[str],
    k_neighbors: int = 5,
    seed: int = 0,
) -> tuple[np.ndarray, list[str]]:
    """Oversample every minority class up to the majority count.

    Each synthetic point is x + u (x' - x) for a seeded-random minority
    sample x, one of its k nearest same-class neighbors x' (Euclidean;
    distance ties break on the lower row index; k caps at class size
    minus 1), and u ~ Uniform(0, 1). Original rows come first,
    unchanged; synthetics are appended grouped by class in label order.

    Raises:
        ClassTooSmall: a class needing oversampling has < 2 members.
    """
    X = np.asarray(features, dtype=float)
    y = list(labels)
    if X.shape[0] != len(y):
        raise ValueError("features and labels must align")
    classes = sorted(set(y))
    counts = {c: y.count(c) for c in classes}
    majority = max(counts.values())

    rng = np.random.default_rng(seed)
    synth_rows: list[np.ndarray] = []
    synth_labels: list[str] = []
    for cls in classes:
        deficit = majority - counts[cls]
        if deficit == 0:
            continue
        if counts[cls] < 2:
            raise ClassTooSmall(cls)
        members = np.asarray([i for i, lab in enumerate(y) if lab == cls])
        pts = X[members]
        m = len(members)
        k = min(k_neighbors, m - 1)
        # pairwise distances; ties resolved by lower row index via stable sort
        diffs = pts[:, None, :] - pts[None, :, :]
        dists = np.sqrt((diffs * diffs).sum(axis=2))
        np.fill_diagonal(dists, np.inf)
        neighbor_idx = np.argsort(dists, axis=1, kind="stable")[:, :k]
        for _ in range(deficit):
            base = int(rng.integers(0, m))
            pick = int(rng.integers(0, k))
            other = int(neighbor_idx[base, pick])
            u = float(rng.random())
            synth_rows.append(pts[base] + u * (pts[other] - pts[base]))
            synth_labels.append(cls)

    if not synth_rows:
        return X, y
    return np.vstack([X, np.vstack(synth_rows)]), y + synth_labels


def class_weights(
    labels: Sequence[str], classes: Sequence[str] | None = None
) -> dict[str, float]:
    """Balanced weights w_k = n / (K * n_k).

    Raises:
        MissingClass: an expected class is absent from the labels.
    """
    y = list(labels)
    if classes is None:
        classes = sorted(set(y))
    weights = {}
    n, K = len(y), len(classes)
    for cls in classes:
        n_k = y.count(cls)
        if n_k == 0:
            raise MissingClass(cls)
        weights[cls] = n / (K * n_k)
    return weights
