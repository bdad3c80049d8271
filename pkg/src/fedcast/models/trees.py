"""Decision-tree building blocks shared by the boosted and bagged models.

Trees are stored as flat parallel arrays (children, split feature,
threshold, leaf value, cover). The split convention is
``x[feature] <= threshold`` goes left. ``cover`` is the fraction of
training weight reaching each node; the root covers 1 and a parent's
cover equals the sum of its children's, which the explanation module
relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class Tree:
    feature: np.ndarray        # int, LEAF at leaves
    threshold: np.ndarray      # float, nan at leaves
    children_left: np.ndarray  # int, LEAF at leaves
    children_right: np.ndarray
    value: np.ndarray          # (n_nodes, value_dim); internal rows unused by predict
    cover: np.ndarray          # float, training-weight fraction reaching the node
    n_node_samples: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def value_dim(self) -> int:
        return self.value.shape[1]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf values for each row, shape (n, value_dim)."""
        idx = np.zeros(X.shape[0], dtype=np.int64)
        active = self.feature[idx] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            nodes = idx[rows]
            go_left = X[rows, self.feature[nodes]] <= self.threshold[nodes]
            idx[rows] = np.where(
                go_left, self.children_left[nodes], self.children_right[nodes]
            )
            active = self.feature[idx] != LEAF
        return self.value[idx]

    def max_depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        out = 0
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                for child in (self.children_left[node], self.children_right[node]):
                    depth[child] = depth[node] + 1
                    out = max(out, depth[child])
        return out

    def to_payload(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [None if math.isnan(t) else t for t in self.threshold.tolist()],
            "children_left": self.children_left.tolist(),
            "children_right": self.children_right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
            "n_node_samples": self.n_node_samples.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "Tree":
        thr = [math.nan if t is None else t for t in payload["threshold"]]
        return cls(
            feature=np.asarray(payload["feature"], dtype=np.int64),
            threshold=np.asarray(thr, dtype=float),
            children_left=np.asarray(payload["children_left"], dtype=np.int64),
            children_right=np.asarray(payload["children_right"], dtype=np.int64),
            value=np.asarray(payload["value"], dtype=float),
            cover=np.asarray(payload["cover"], dtype=float),
            n_node_samples=np.asarray(payload["n_node_samples"], dtype=np.int64),
        )


class _TreeBuilder:
    """Accumulates nodes while a tree is grown recursively."""

    def __init__(self, value_dim: int):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[np.ndarray] = []
        self.cover: list[float] = []
        self.n_samples: list[int] = []
        self.value_dim = value_dim

    def add_node(self, cover: float, n_samples: int) -> int:
        self.feature.append(LEAF)
        self.threshold.append(math.nan)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(np.zeros(self.value_dim))
        self.cover.append(cover)
        self.n_samples.append(n_samples)
        return len(self.feature) - 1

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int64),
            threshold=np.asarray(self.threshold, dtype=float),
            children_left=np.asarray(self.left, dtype=np.int64),
            children_right=np.asarray(self.right, dtype=np.int64),
            value=np.vstack(self.value),
            cover=np.asarray(self.cover, dtype=float),
            n_node_samples=np.asarray(self.n_samples, dtype=np.int64),
        )


def resolve_max_features(max_features, d: int) -> int:
    """Number of candidate features per split."""
    if max_features in (None, "all"):
        return d
    if max_features == "sqrt":
        return min(d, math.ceil(math.sqrt(d)))
    m = int(max_features)
    if m < 1:
        raise ValueError("max_features must be >= 1")
    return min(d, m)


def _candidate_features(rng: np.random.Generator, d: int, m: int) -> np.ndarray:
    if m >= d:
        return np.arange(d)
    return np.sort(rng.permutation(d)[:m])


def _best_split_weighted_sse(
    sub: np.ndarray,
    target: np.ndarray,
    weight: np.ndarray,
    min_leaf: int,
) -> tuple[float, int, float] | None:
    """Best (gain, column position, threshold) by weighted-SSE reduction.

    Evaluates every candidate feature column of ``sub`` in one pass.
    The proxy ``S_L^2/W_L + S_R^2/W_R`` orders splits the same way as
    the true gain; ties resolve to the lowest candidate feature, then
    the lowest threshold. Returns None when no valid position exists.
    """
    n = sub.shape[0]
    if n < 2:
        return None
    order = np.argsort(sub, axis=0, kind="stable")
    cols = np.arange(sub.shape[1])
    xs = sub[order, cols]
    ws = weight[order]
    wr = ws * target[order]
    cw = np.cumsum(ws, axis=0)
    cwr = np.cumsum(wr, axis=0)
    total_w = cw[-1]
    total_wr = cwr[-1]

    left_w = cw[:-1]
    left_wr = cwr[:-1]
    right_w = total_w - left_w
    right_wr = total_wr - left_wr
    positions = np.arange(1, n)[:, None]
    valid = (
        (xs[:-1] < xs[1:])
        & (positions >= min_leaf)
        & (n - positions >= min_leaf)
        & (left_w > 0)
        & (right_w > 0)
    )
    if not valid.any():
        return None
    with np.errstate(divide="ignore", invalid="ignore"):
        proxy = left_wr**2 / left_w + right_wr**2 / right_w
    proxy[~valid] = -np.inf
    # scan feature-major so the first max is the lowest candidate
    # feature, then the lowest threshold within it
    flat = proxy.T.ravel()
    best = int(np.argmax(flat))
    f_pos, boundary = divmod(best, n - 1)
    gain = float(flat[best]) - float(total_wr[f_pos] ** 2 / total_w[f_pos])
    threshold = float((xs[boundary, f_pos] + xs[boundary + 1, f_pos]) / 2.0)
    return gain, f_pos, threshold


def grow_regression_tree(
    X: np.ndarray,
    target: np.ndarray,
    weight: np.ndarray,
    rng: np.random.Generator,
    max_depth: int,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features,
    leaf_value_fn,
) -> Tree:
    """Variance-reduction regression tree on (target, weight).

    ``leaf_value_fn(indices) -> float`` supplies leaf values, letting
    the boosting trainer install Newton-step leaves.
    """
    n, d = X.shape
    m = resolve_max_features(max_features, d)
    total_weight = float(weight.sum())
    builder = _TreeBuilder(value_dim=1)

    def grow(indices: np.ndarray, depth: int) -> int:
        wn = weight[indices]
        node = builder.add_node(
            cover=float(wn.sum()) / total_weight,
            n_samples=len(indices),
        )
        splittable = (
            depth < max_depth
            and len(indices) >= min_samples_split
            and len(indices) >= 2 * min_samples_leaf
        )
        best = None
        if splittable:
            candidates = _candidate_features(rng, d, m)
            sub = X[indices[:, None], candidates[None, :]]
            found = _best_split_weighted_sse(
                sub, target[indices], wn, min_samples_leaf
            )
            if found is not None and found[0] > 1e-12:
                best = found
        if best is None:
            builder.value[node][0] = leaf_value_fn(indices)
            return node
        _, f_pos, threshold = best
        go_left = sub[:, f_pos] <= threshold
        builder.feature[node] = int(candidates[f_pos])
        builder.threshold[node] = threshold
        builder.left[node] = grow(indices[go_left], depth + 1)
        builder.right[node] = grow(indices[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return builder.finish()


def _gini_proxy_best_split(
    col: np.ndarray, onehot: np.ndarray, min_leaf: int
) -> tuple[float, float] | None:
    """Best threshold for one feature by Gini-impurity reduction.

    Maximizing sum_k c_Lk^2 / n_L + sum_k c_Rk^2 / n_R is equivalent to
    minimizing the child-weighted Gini impurity.
    """
    n = len(col)
    order = np.argsort(col, kind="stable")
    xs = col[order]
    counts = np.cumsum(onehot[order], axis=0)
    total = counts[-1]

    left = counts[:-1]
    right = total - left
    n_left = np.arange(1, n)
    n_right = n - n_left
    valid = (xs[:-1] < xs[1:]) & (n_left >= min_leaf) & (n_right >= min_leaf)
    if not valid.any():
        return None
    proxy = (left**2).sum(axis=1) / n_left + (right**2).sum(axis=1) / n_right
    proxy = np.where(valid, proxy, -np.inf)
    best = int(np.argmax(proxy))
    gain = float(proxy[best]) - float((total**2).sum() / n)
    return gain, float((xs[best] + xs[best + 1]) / 2.0)


def grow_classification_tree(
    X: np.ndarray,
    y_index: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
    max_depth: int | None,
    min_samples_split: int,
    min_samples_leaf: int,
    max_features,
    random_thresholds: bool,
) -> Tree:
    """Gini classification tree; leaves hold class distributions.

    ``random_thresholds=True`` draws one uniform threshold per candidate
    feature between the node's observed min and max (extra-trees style)
    instead of searching all boundaries.
    """
    n, d = X.shape
    m = resolve_max_features(max_features, d)
    depth_cap = math.inf if max_depth is None else max_depth
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y_index] = 1.0
    builder = _TreeBuilder(value_dim=n_classes)

    def leaf_distribution(indices: np.ndarray) -> np.ndarray:
        return onehot[indices].sum(axis=0) / len(indices)

    def grow(indices: np.ndarray, depth: int) -> int:
        node = builder.add_node(cover=len(indices) / n, n_samples=len(indices))
        classes_here = np.unique(y_index[indices])
        splittable = (
            depth < depth_cap
            and len(indices) >= min_samples_split
            and len(indices) >= 2 * min_samples_leaf
            and len(classes_here) > 1
        )
        best = None
        if splittable:
            candidates = _candidate_features(rng, d, m)
            for f in candidates:
                col = X[indices, f]
                if random_thresholds:
                    lo, hi = float(col.min()), float(col.max())
                    if lo == hi:
                        continue
                    threshold = float(rng.uniform(lo, hi))
                    go_left = col <= threshold
                    n_left = int(go_left.sum())
                    if n_left < min_samples_leaf or len(col) - n_left < min_samples_leaf:
                        continue
                    counts_left = onehot[indices[go_left]].sum(axis=0)
                    counts_right = onehot[indices[~go_left]].sum(axis=0)
                    total = counts_left + counts_right
                    proxy = (counts_left**2).sum() / n_left + (
                        counts_right**2
                    ).sum() / (len(col) - n_left)
                    gain = proxy - float((total**2).sum() / len(col))
                    found = (gain, threshold)
                else:
                    found = _gini_proxy_best_split(col, onehot[indices], min_samples_leaf)
                if found is None:
                    continue
                gain, threshold = found
                if gain <= 1e-12:
                    continue
                if best is None or gain > best[0]:
                    best = (gain, int(f), threshold)
        if best is None:
            builder.value[node][:] = leaf_distribution(indices)
            return node
        _, f, threshold = best
        go_left = X[indices, f] <= threshold
        builder.feature[node] = f
        builder.threshold[node] = threshold
        builder.left[node] = grow(indices[go_left], depth + 1)
        builder.right[node] = grow(indices[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return builder.finish()
