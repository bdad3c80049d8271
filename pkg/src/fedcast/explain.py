"""Exact Shapley attributions for the tree ensembles.

The fast path implements the polynomial-time path-dependent recursion
(extend/unwind over unique decision paths, conditional expectations
weighted by node covers). The slow path enumerates feature subsets with
factorial weights over the same cover-weighted value function and
exists purely to verify the fast path; both operate in margin space
(pre-softmax), where attributions stay additive across trees.

A feature never used by a tree's splits receives exactly zero, and for
every sample ``base_value + sum(phi)`` reproduces the model margin.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import DimensionMismatch, MissingCover, TooManyFeatures
from .models.forest import ForestModel
from .models.gbdt import GbdtModel
from .models.trees import LEAF, Tree

BRUTE_FORCE_FEATURE_LIMIT = 12

COVER_TOL = 1e-9


@dataclass(frozen=True)
class Attribution:
    """Per-sample, per-class, per-feature Shapley values plus bases."""

    values: np.ndarray       # (n_samples, n_classes, n_features)
    base_values: np.ndarray  # (n_classes,)
    feature_names: tuple[str, ...]
    class_names: tuple[str, ...]

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    def margins(self) -> np.ndarray:
        """base + sum(phi): the reconstructed model margin, (n, K)."""
        return self.base_values[None, :] + self.values.sum(axis=2)


def _validate_cover(tree: Tree) -> None:
    cover = tree.cover
    if cover is None or len(cover) != tree.n_nodes or cover[0] <= 0:
        raise MissingCover("tree lacks usable cover bookkeeping")
    for node in range(tree.n_nodes):
        if tree.feature[node] == LEAF:
            continue
        left, right = tree.children_left[node], tree.children_right[node]
        if abs(cover[node] - (cover[left] + cover[right])) > COVER_TOL * max(1.0, cover[node]):
            raise MissingCover(f"cover of node {node} differs from its children's sum")


def _expected_values(tree: Tree, column: int) -> np.ndarray:
    """Cover-weighted conditional expectation at every node."""
    expected = np.zeros(tree.n_nodes)
    # children precede nothing in particular, so walk nodes in reverse
    # allocation order: children always have higher ids than parents.
    for node in range(tree.n_nodes - 1, -1, -1):
        if tree.feature[node] == LEAF:
            expected[node] = tree.value[node, column]
        else:
            left, right = tree.children_left[node], tree.children_right[node]
            expected[node] = (
                tree.cover[left] * expected[left] + tree.cover[right] * expected[right]
            ) / tree.cover[node]
    return expected


def _scalar_trees(model) -> Iterator[tuple[Tree, int, float, int]]:
    """Yield (tree, value_column, scale, class_index) for a tree model."""
    if isinstance(model, GbdtModel):
        for stage in model.trees:
            for k, tree in enumerate(stage):
                yield tree, 0, model.params.learning_rate, k
    elif isinstance(model, ForestModel):
        scale = 1.0 / len(model.trees)
        for tree in model.trees:
            for k in range(len(model.classes)):
                yield tree, k, scale, k
    else:
        raise TypeError(f"tree_shap supports GbdtModel and ForestModel, got {type(model).__name__}")


def _base_offset(model) -> np.ndarray:
    if isinstance(model, GbdtModel):
        return model.f0.copy()
    return np.zeros(len(model.classes))


def margin_scores(model, X: np.ndarray) -> np.ndarray:
    """The margin that attributions decompose, (n, K)."""
    if isinstance(model, GbdtModel):
        return model.decision_scores(X)
    if isinstance(model, ForestModel):
        return model.predict_proba(X)
    raise TypeError(f"unsupported model {type(model).__name__}")


# --- fast path: unique-path recursion ----------------------------------------

def _tree_shap_single(
    tree: Tree, expected: np.ndarray, x: np.ndarray, phi: np.ndarray, scale: float
) -> None:
    """Accumulate one tree's Shapley values for one sample into phi."""
    maxd = tree.max_depth() + 2
    size = (maxd * (maxd + 1)) // 2
    feature_indexes = np.zeros(size, dtype=np.int64)
    zero_fractions = np.zeros(size)
    one_fractions = np.zeros(size)
    pweights = np.zeros(size)

    def extend(fi, zf, of, pw, unique_depth, zero_fraction, one_fraction, feature_index):
        fi[unique_depth] = feature_index
        zf[unique_depth] = zero_fraction
        of[unique_depth] = one_fraction
        pw[unique_depth] = 1.0 if unique_depth == 0 else 0.0
        for i in range(unique_depth - 1, -1, -1):
            pw[i + 1] += one_fraction * pw[i] * (i + 1) / (unique_depth + 1)
            pw[i] = zero_fraction * pw[i] * (unique_depth - i) / (unique_depth + 1)

    def unwind(fi, zf, of, pw, unique_depth, path_index):
        one_fraction = of[path_index]
        zero_fraction = zf[path_index]
        next_one = pw[unique_depth]
        for i in range(unique_depth - 1, -1, -1):
            if one_fraction != 0.0:
                tmp = pw[i]
                pw[i] = next_one * (unique_depth + 1) / ((i + 1) * one_fraction)
                next_one = tmp - pw[i] * zero_fraction * (unique_depth - i) / (unique_depth + 1)
            else:
                pw[i] = pw[i] * (unique_depth + 1) / (zero_fraction * (unique_depth - i))
        for i in range(path_index, unique_depth):
            fi[i] = fi[i + 1]
            zf[i] = zf[i + 1]
            of[i] = of[i + 1]

    def unwound_sum(fi, zf, of, pw, unique_depth, path_index) -> float:
        one_fraction = of[path_index]
        zero_fraction = zf[path_index]
        next_one = pw[unique_depth]
        total = 0.0
        for i in range(unique_depth - 1, -1, -1):
            if one_fraction != 0.0:
                tmp = next_one * (unique_depth + 1) / ((i + 1) * one_fraction)
                total += tmp
                next_one = pw[i] - tmp * zero_fraction * (unique_depth - i) / (unique_depth + 1)
            else:
                total += (pw[i] / zero_fraction) / ((unique_depth - i) / (unique_depth + 1))
        return total

    def recurse(
        node,
        unique_depth,
        parent_fi,
        parent_zf,
        parent_of,
        parent_pw,
        parent_zero_fraction,
        parent_one_fraction,
        parent_feature_index,
    ):
        fi = parent_fi[unique_depth + 1 :]
        fi[: unique_depth + 1] = parent_fi[: unique_depth + 1]
        zf = parent_zf[unique_depth + 1 :]
        zf[: unique_depth + 1] = parent_zf[: unique_depth + 1]
        of = parent_of[unique_depth + 1 :]
        of[: unique_depth + 1] = parent_of[: unique_depth + 1]
        pw = parent_pw[unique_depth + 1 :]
        pw[: unique_depth + 1] = parent_pw[: unique_depth + 1]

        extend(fi, zf, of, pw, unique_depth, parent_zero_fraction, parent_one_fraction, parent_feature_index)
        split = tree.feature[node]

        if split == LEAF:
            leaf_value = expected[node]
            for i in range(1, unique_depth + 1):
                w = unwound_sum(fi, zf, of, pw, unique_depth, i)
                phi[fi[i]] += scale * w * (of[i] - zf[i]) * leaf_value
            return

        left, right = tree.children_left[node], tree.children_right[node]
        hot = left if x[split] <= tree.threshold[node] else right
        cold = right if hot == left else left
        hot_zero = tree.cover[hot] / tree.cover[node]
        cold_zero = tree.cover[cold] / tree.cover[node]
        incoming_zero = 1.0
        incoming_one = 1.0

        path_index = 0
        while path_index <= unique_depth:
            if fi[path_index] == split:
                break
            path_index += 1
        if path_index != unique_depth + 1:
            incoming_zero = zf[path_index]
            incoming_one = of[path_index]
            unwind(fi, zf, of, pw, unique_depth, path_index)
            unique_depth -= 1

        recurse(hot, unique_depth + 1, fi, zf, of, pw, hot_zero * incoming_zero, incoming_one, int(split))
        recurse(cold, unique_depth + 1, fi, zf, of, pw, cold_zero * incoming_zero, 0.0, int(split))

    recurse(0, 0, feature_indexes, zero_fractions, one_fractions, pweights, 1.0, 1.0, -1)


def tree_shap(
    model,
    X: np.ndarray,
    feature_names: Sequence[str] | None = None,
) -> Attribution:
    """Exact per-class Shapley attribution of the model's margins.

    ``base_values`` are the cover-weighted expected margins (for the
    boosted model, the log priors plus each tree's expectation), so
    local accuracy holds on every sample.

    Raises:
        MissingCover, DimensionMismatch.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(model.n_features, X.shape[1])
    n, d = X.shape
    K = len(model.classes)
    names = (
        tuple(feature_names)
        if feature_names is not None
        else tuple(f"f{j}" for j in range(d))
    )

    values = np.zeros((n, K, d))
    base = _base_offset(model)
    seen: dict[int, None] = {}
    expectations: dict[tuple[int, int], np.ndarray] = {}
    for tree, column, scale, k in _scalar_trees(model):
        if id(tree) not in seen:
            _validate_cover(tree)
            seen[id(tree)] = None
        key = (id(tree), column)
        if key not in expectations:
            expectations[key] = _expected_values(tree, column)
        expected = expectations[key]
        base[k] += scale * expected[0]
        phi = np.zeros(d)
        for i in range(n):
            phi[:] = 0.0
            _tree_shap_single(tree, expected, X[i], phi, scale)
            values[i, k] += phi

    return Attribution(
        values=values,
        base_values=base,
        feature_names=names,
        class_names=tuple(model.classes),
    )


# --- slow path: subset enumeration (verification oracle) ----------------------

def _restricted_walk(
    tree: Tree, expected_column: int, x: np.ndarray, fixed: frozenset[int]
) -> float:
    """Expected leaf value when only ``fixed`` features follow x."""

    def walk(node: int) -> float:
        if tree.feature[node] == LEAF:
            return float(tree.value[node, expected_column])
        f = int(tree.feature[node])
        left, right = tree.children_left[node], tree.children_right[node]
        if f in fixed:
            child = left if x[f] <= tree.threshold[node] else right
            return walk(child)
        return (
            tree.cover[left] * walk(left) + tree.cover[right] * walk(right)
        ) / tree.cover[node]

    return walk(0)


def brute_force_shapley(model, x: np.ndarray, background=None) -> np.ndarray:
    """Exact Shapley values by subset enumeration, (K, d).

    The value function fixes coalition features to x and routes the
    complement down cover-weighted tree paths, so no background matrix
    is needed; the argument is accepted for interface compatibility and
    ignored. Features a tree never splits on are null players and drop
    out of that tree's enumeration, which keeps this exact yet feasible.

    Raises:
        TooManyFeatures: more than 12 features.
        MissingCover.
    """
    x = np.asarray(x, dtype=float).ravel()
    d = model.n_features
    if len(x) != d:
        raise DimensionMismatch(d, len(x))
    if d > BRUTE_FORCE_FEATURE_LIMIT:
        raise TooManyFeatures(d, BRUTE_FORCE_FEATURE_LIMIT)
    K = len(model.classes)
    phi = np.zeros((K, d))

    for tree, column, scale, k in _scalar_trees(model):
        _validate_cover(tree)
        used = sorted(
            {int(f) for f in tree.feature[tree.feature != LEAF]}
        )
        if not used:
            continue
        u = len(used)
        fact = [math.factorial(i) for i in range(u + 1)]
        cache: dict[frozenset[int], float] = {}

        def value_of(subset: frozenset[int]) -> float:
            if subset not in cache:
                cache[subset] = _restricted_walk(tree, column, x, subset)
            return cache[subset]

        for j in used:
            others = [f for f in used if f != j]
            total = 0.0
            for r in range(len(others) + 1):
                weight = fact[r] * fact[u - 1 - r] / fact[u]
                for combo in itertools.combinations(others, r):
                    s = frozenset(combo)
                    total += weight * (value_of(s | {j}) - value_of(s))
            phi[k, j] += scale * total

    return phi


# --- summaries ----------------------------------------------------------------

@dataclass(frozen=True)
class ShapSummary:
    """Ranked mean-|phi| table plus the raw long-form rows."""

    rows: tuple[tuple, ...]          # (rank, feature, mean_abs, per-class means...)
    class_names: tuple[str, ...]
    long_rows: tuple[tuple, ...]     # (sample, class, feature, phi, feature_value)

    def summary_csv_text(self) -> str:
        header = "rank,feature,mean_abs_shap," + ",".join(
            f"mean_abs_shap_{c}" for c in self.class_names
        )
        lines = [header]
        for row in self.rows:
            rank, feature, mean_abs, *per_class = row
            lines.append(
                f"{rank},{feature},{mean_abs!r}," + ",".join(repr(v) for v in per_class)
            )
        return "\n".join(lines) + "\n"

    def long_csv_text(self) -> str:
        lines = ["sample,class,feature,phi,feature_value"]
        for sample, cls, feature, phi, feature_value in self.long_rows:
            lines.append(f"{sample},{cls},{feature},{phi!r},{feature_value!r}")
        return "\n".join(lines) + "\n"

    def top_features(self) -> list[str]:
        return [row[1] for row in self.rows]

    def to_dict(self) -> list[dict]:
        out = []
        for row in self.rows:
            rank, feature, mean_abs, *per_class = row
            out.append(
                {
                    "rank": rank,
                    "feature": feature,
                    "mean_abs_shap": mean_abs,
                    "per_class": dict(zip(self.class_names, per_class)),
                }
            )
        return out


def shap_summary(attr: Attribution, X: np.ndarray, top_n: int = 20) -> ShapSummary:
    """Rank features by mean |phi| across samples and classes.

    Ties break by ascending feature name. The long-form rows carry each
    (sample, class, feature) attribution with the feature's raw value,
    ready for beeswarm-style plotting.
    """
    X = np.asarray(X, dtype=float)
    mean_abs = np.abs(attr.values).mean(axis=(0, 1))  # (d,)
    per_class = np.abs(attr.values).mean(axis=0)      # (K, d)
    order = sorted(
        range(len(attr.feature_names)),
        key=lambda j: (-mean_abs[j], attr.feature_names[j]),
    )[:top_n]
    rows = tuple(
        (
            rank,
            attr.feature_names[j],
            float(mean_abs[j]),
            *(float(per_class[k, j]) for k in range(len(attr.class_names))),
        )
        for rank, j in enumerate(order, start=1)
    )
    long_rows = tuple(
        (
            i,
            attr.class_names[k],
            attr.feature_names[j],
            float(attr.values[i, k, j]),
            float(X[i, j]),
        )
        for i in range(attr.n_samples)
        for k in range(len(attr.class_names))
        for j in range(len(attr.feature_names))
    )
    return ShapSummary(rows=rows, class_names=attr.class_names, long_rows=long_rows)
