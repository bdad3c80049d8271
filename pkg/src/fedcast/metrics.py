"""Classification metrics: rank-based multiclass AUC plus the usual rates.

``roc_auc_ovr`` is the Mann-Whitney rank statistic (ties credited 0.5)
applied one-vs-rest per class and averaged without class weights, so it
is invariant under any strictly monotone transform of each class's
probability column. The confusion matrix uses the domain's fixed
Raise / Hold / Lower order whenever the labels allow it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import LengthMismatch, SingleClassPresent

DOMAIN_CLASS_ORDER = ("Raise", "Hold", "Lower")


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned their group average."""
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    n = len(scores)
    change = np.empty(n, dtype=bool)
    change[0] = True
    change[1:] = sorted_scores[1:] != sorted_scores[:-1]
    group_id = np.cumsum(change) - 1
    starts = np.nonzero(change)[0]
    counts = np.diff(np.append(starts, n))
    group_avg = starts + (counts - 1) / 2.0 + 1.0
    ranks = np.empty(n)
    ranks[order] = group_avg[group_id]
    return ranks


def _binary_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    n_pos = int(positive.sum())
    n_neg = len(scores) - n_pos
    ranks = _average_ranks(scores)
    rank_sum = float(ranks[positive].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_auc_ovr(
    y_true: Sequence[str],
    probs: np.ndarray,
    classes: Sequence[str] | None = None,
) -> float:
    """Macro one-vs-rest AUC from class-probability columns.

    Args:
        y_true: labels; must contain at least two distinct classes.
        probs: (n, K) score matrix whose columns follow ``classes``.
        classes: column order of ``probs``; defaults to the sorted
            distinct labels of ``y_true``.

    Per class present in ``y_true``, the binary AUC of that class's
    column is computed by rank statistic; the result is the unweighted
    mean over present classes.

    Raises:
        SingleClassPresent: fewer than two classes in y_true.
        LengthMismatch: y_true and probs disagree on sample count.
    """
    y = list(y_true)
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 2 or probs.shape[0] != len(y):
        raise LengthMismatch("probs must be (n_samples, n_classes)")
    present = sorted(set(y))
    if len(present) < 2:
        raise SingleClassPresent("need at least 2 classes in y_true")
    if classes is None:
        classes = present
    col = {c: j for j, c in enumerate(classes)}

    aucs = []
    for cls in present:
        positive = np.asarray([lab == cls for lab in y])
        aucs.append(_binary_auc(probs[:, col[cls]], positive))
    return float(np.mean(aucs))


@dataclass(frozen=True)
class MetricsReport:
    """Threshold metrics plus the confusion matrix for one evaluation."""

    accuracy: float
    per_class: Mapping[str, Mapping[str, float]]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    confusion_matrix: tuple[tuple[int, ...], ...]  # rows actual, cols predicted
    class_order: tuple[str, ...]
    n_samples: int
    ovr_macro_auc: float | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {c: dict(v) for c, v in self.per_class.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "confusion_matrix": [list(r) for r in self.confusion_matrix],
            "class_order": list(self.class_order),
            "n_samples": self.n_samples,
            "ovr_macro_auc": self.ovr_macro_auc,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def confusion_csv_text(self) -> str:
        lines = ["actual\\predicted," + ",".join(self.class_order)]
        for cls, row in zip(self.class_order, self.confusion_matrix):
            lines.append(cls + "," + ",".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


def resolve_class_order(labels: Sequence[str]) -> tuple[str, ...]:
    """Domain order when labels fit it, else sorted distinct labels."""
    distinct = set(labels)
    if distinct <= set(DOMAIN_CLASS_ORDER):
        return DOMAIN_CLASS_ORDER
    return tuple(sorted(distinct))


def classification_metrics(
    y_true: Sequence[str],
    y_pred: Sequence[str],
    probs: np.ndarray | None = None,
    prob_classes: Sequence[str] | None = None,
    class_order: Sequence[str] | None = None,
) -> MetricsReport:
    """Accuracy, per-class and macro precision/recall/F1, confusion matrix.

    0/0 precision or recall is defined as 0, as is F1 when both rates
    are 0. Macro averages are unweighted over ``class_order``. When
    ``probs`` is supplied the macro OvR AUC is included.

    Raises:
        LengthMismatch.
    """
    y_t = list(y_true)
    y_p = list(y_pred)
    if len(y_t) != len(y_p):
        raise LengthMismatch(f"{len(y_t)} true vs {len(y_p)} predicted")
    order = tuple(class_order) if class_order is not None else resolve_class_order(y_t + y_p)
    idx = {c: i for i, c in enumerate(order)}
    K = len(order)
    cm = np.zeros((K, K), dtype=int)
    for t, p in zip(y_t, y_p):
        cm[idx[t], idx[p]] += 1

    per_class: dict[str, dict[str, float]] = {}
    precisions, recalls, f1s = [], [], []
    for i, cls in enumerate(order):
        tp = cm[i, i]
        predicted = cm[:, i].sum()
        actual = cm[i, :].sum()
        precision = tp / predicted if predicted > 0 else 0.0
        recall = tp / actual if actual > 0 else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        per_class[cls] = {"precision": precision, "recall": recall, "f1": f1}
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)

    auc = None
    if probs is not None and len(set(y_t)) >= 2:
        auc = roc_auc_ovr(y_t, probs, classes=prob_classes)

    n = len(y_t)
    return MetricsReport(
        accuracy=float(np.trace(cm)) / n if n else 0.0,
        per_class=per_class,
        macro_precision=float(np.mean(precisions)),
        macro_recall=float(np.mean(recalls)),
        macro_f1=float(np.mean(f1s)),
        confusion_matrix=tuple(tuple(int(v) for v in row) for row in cm),
        class_order=order,
        n_samples=n,
        ovr_macro_auc=auc,
    )
