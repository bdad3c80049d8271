"""Cross-validated evaluation and the two-stage hyperparameter search.

``cross_validate`` runs a trainer over a :class:`~fedcast.sampling.SplitPlan`'s
folds, optionally applying SMOTE to each fold's training rows (never to
validation rows), and aggregates metrics as mean +/- population std.

``tune`` reproduces the search protocol: a randomized stage samples
candidates uniformly from per-axis grids, then a grid stage sweeps the
axis-aligned neighborhood (+/- ``grid_radius`` steps per axis) of the
stage-one winner. Selection is by mean CV macro OvR AUC with ties going
to fewer estimators, then shallower depth, then the earlier candidate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import EmptySpace, FedcastError
from .metrics import MetricsReport, classification_metrics
from .utils import parallel_map
from .models import (
    FnnConfig,
    GbdtParams,
    train_fnn,
    train_gbdt,
    train_logreg,
    train_random_forest,
)
from .sampling import class_weights, smote_resample

Trainer = Callable[[np.ndarray, Sequence[str], int], object]

AGGREGATED_METRICS = (
    "accuracy",
    "macro_precision",
    "macro_recall",
    "macro_f1",
    "ovr_macro_auc",
)


@dataclass(frozen=True)
class CrossValResult:
    fold_reports: tuple[MetricsReport, ...]
    aggregate: Mapping[str, tuple[float, float]]  # metric -> (mean, population std)

    @property
    def mean_auc(self) -> float:
        return self.aggregate["ovr_macro_auc"][0]

    def to_dict(self) -> dict:
        return {
            "folds": [r.to_dict() for r in self.fold_reports],
            "aggregate": {
                k: {"mean": m, "std": s} for k, (m, s) in self.aggregate.items()
            },
        }


def cross_validate(
    trainer: Trainer,
    X: np.ndarray,
    y: Sequence[str],
    folds: Sequence[tuple[Sequence[int], Sequence[int]]],
    apply_smote: bool = False,
    seed: int = 0,
    threads: int = 1,
) -> CrossValResult:
    """Train and evaluate once per fold.

    SMOTE, when enabled, resamples only the fold's training rows with a
    fold-specific seed; validation rows always come straight from the
    original matrix. Folds are independent, so ``threads`` changes the
    wall time and never the result (reports merge in fold order).
    Trainer errors propagate annotated with the fold index.
    """
    X = np.asarray(X, dtype=float)
    y = list(y)
    fold_seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(len(folds))]

    def run_fold(fold_idx: int) -> MetricsReport:
        train_idx = np.asarray(folds[fold_idx][0], dtype=int)
        val_idx = np.asarray(folds[fold_idx][1], dtype=int)
        X_tr, y_tr = X[train_idx], [y[i] for i in train_idx]
        if apply_smote:
            X_tr, y_tr = smote_resample(X_tr, y_tr, seed=fold_seeds[fold_idx])
        try:
            model = trainer(X_tr, y_tr, fold_seeds[fold_idx])
        except FedcastError as exc:
            # annotate in place: keeps the concrete type and attributes
            exc.args = (f"fold {fold_idx}: {exc}",)
            raise
        X_val = X[val_idx]
        probs = model.predict_proba(X_val)
        classes = list(model.classes)
        y_pred = [classes[j] for j in probs.argmax(axis=1)]
        y_val = [y[i] for i in val_idx]
        return classification_metrics(y_val, y_pred, probs=probs, prob_classes=classes)

    reports = parallel_map(run_fold, list(range(len(folds))), threads=threads)

    aggregate = {}
    for name in AGGREGATED_METRICS:
        vals = np.asarray([getattr(r, name) for r in reports], dtype=float)
        aggregate[name] = (float(vals.mean()), float(vals.std()))
    return CrossValResult(fold_reports=tuple(reports), aggregate=aggregate)


# --- trainer construction ------------------------------------------------------

MODEL_FAMILIES = ("gbdt", "random_forest", "extra_trees", "logreg", "naive_bayes", "fnn")


def make_trainer(
    family: str, params: Mapping | None = None, weight_classes: bool = True
) -> Trainer:
    """A (X, y, seed) -> model callable for one family + hyperparameters.

    With ``weight_classes`` the balanced class weights of each training
    call's labels feed the family's weighting mechanism (sample weights
    for trees, loss weights otherwise).
    """
    params = dict(params or {})

    def weights_for(y: Sequence[str]):
        return class_weights(y) if weight_classes else None

    def sample_weights_for(y: Sequence[str]):
        if not weight_classes:
            return None
        w = class_weights(y)
        return np.asarray([w[c] for c in y], dtype=float)

    if family == "gbdt":
        def trainer(X, y, seed):
            return train_gbdt(
                X, y, sample_weights=sample_weights_for(y),
                params=GbdtParams(**params), seed=seed,
            )
    elif family in ("random_forest", "extra_trees"):
        mode = "rf" if family == "random_forest" else "extra"
        def trainer(X, y, seed):
            return train_random_forest(X, y, mode=mode, seed=seed, **params)
    elif family == "logreg":
        def trainer(X, y, seed):
            return train_logreg(X, y, class_weights=weights_for(y), seed=seed, **params)
    elif family == "naive_bayes":
        from .models import train_naive_bayes

        def trainer(X, y, seed):
            return train_naive_bayes(X, y, **params)
    elif family == "fnn":
        def trainer(X, y, seed):
            config = FnnConfig(seed=seed, **params)
            return train_fnn(X, y, class_weights=weights_for(y), config=config)
    else:
        raise EmptySpace(f"unknown model family {family!r}")
    return trainer


# --- two-stage tuning ----------------------------------------------------------

SEARCH_SPACES: dict[str, dict[str, list]] = {
    # log-ish spacing on the first two axes; includes the documented
    # production default (10, 0.01, 4, leaf 10, split 10) as a grid point
    "gbdt": {
        "n_estimators": [10, 25, 50, 100, 200, 300],
        "learning_rate": [0.005, 0.01, 0.03, 0.1, 0.3],
        "max_depth": [2, 3, 4, 5, 6, 7, 8],
        "min_samples_leaf": [1, 5, 10, 20],
        "min_samples_split": [2, 5, 10, 20],
    },
    "random_forest": {
        "n_trees": [10, 50, 100, 200],
        "max_depth": [2, 4, 8, 16],
        "min_samples_leaf": [1, 5, 10],
        "min_samples_split": [2, 5, 10],
    },
    "extra_trees": {
        "n_trees": [10, 50, 100, 200],
        "max_depth": [2, 4, 8, 16],
        "min_samples_leaf": [1, 5, 10],
        "min_samples_split": [2, 5, 10],
    },
    "logreg": {
        "l2": [0.0001, 0.001, 0.01, 0.1, 1.0, 10.0],
        "lr": [0.01, 0.1, 0.5],
        "epochs": [100, 300, 1000],
    },
    "naive_bayes": {
        "alpha": [0.01, 0.1, 0.5, 1.0, 2.0],
    },
    "fnn": {
        "lr": [0.0001, 0.001, 0.01],
        "epochs": [50, 100, 200],
        "batch_size": [8, 16, 32],
    },
}


@dataclass(frozen=True)
class TuningResult:
    best_params: Mapping
    mean_cv_auc: float
    trail: tuple[dict, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "best_params": dict(self.best_params),
            "mean_cv_auc": self.mean_cv_auc,
            "trail": [dict(t) for t in self.trail],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _tie_key(params: Mapping, mean_auc: float, index: int) -> tuple:
    estimators = params.get("n_estimators", params.get("n_trees", 0))
    depth = params.get("max_depth", 0)
    depth = float("inf") if depth is None else depth
    return (-mean_auc, estimators, depth, index)


def tune(
    trainer_family: str,
    X: np.ndarray,
    y: Sequence[str],
    folds: Sequence[tuple[Sequence[int], Sequence[int]]],
    random_budget: int = 10,
    grid_radius: int = 1,
    seed: int = 0,
    apply_smote: bool = False,
    space: Mapping[str, list] | None = None,
    weight_classes: bool = True,
) -> TuningResult:
    """Randomized search then local grid refinement.

    Raises:
        EmptySpace: no search space exists for the family.
    """
    if space is None:
        space = SEARCH_SPACES.get(trainer_family)
    if not space:
        raise EmptySpace(f"no search space for family {trainer_family!r}")
    axes = sorted(space)
    grids = {a: list(space[a]) for a in axes}
    if any(len(g) == 0 for g in grids.values()):
        raise EmptySpace("search space has an empty axis")

    rng = np.random.default_rng(seed)
    evaluated: dict[tuple, dict] = {}
    trail: list[dict] = []

    def evaluate(index_point: tuple[int, ...]) -> dict:
        if index_point in evaluated:
            return evaluated[index_point]
        params = {a: grids[a][i] for a, i in zip(axes, index_point)}
        trainer = make_trainer(trainer_family, params, weight_classes=weight_classes)
        result = cross_validate(trainer, X, y, folds, apply_smote=apply_smote, seed=seed)
        fold_aucs = [r.ovr_macro_auc for r in result.fold_reports]
        record = {
            "params": params,
            "fold_aucs": fold_aucs,
            "mean_auc": result.mean_auc,
            "order": len(trail),
        }
        evaluated[index_point] = record
        trail.append(record)
        return record

    # stage 1: uniform over the grid lattice
    for _ in range(random_budget):
        point = tuple(int(rng.integers(0, len(grids[a]))) for a in axes)
        evaluate(point)

    def best_record() -> dict:
        return min(trail, key=lambda r: _tie_key(r["params"], r["mean_auc"], r["order"]))

    # stage 2: axis-aligned neighborhood of the stage-1 winner (one axis
    # moves at a time, +/- grid_radius steps, the rest held at the winner)
    if grid_radius > 0 and trail:
        winner = best_record()
        winner_point = tuple(
            grids[a].index(winner["params"][a]) for a in axes
        )
        for axis_pos, axis in enumerate(axes):
            for step in range(-grid_radius, grid_radius + 1):
                i = winner_point[axis_pos] + step
                if not 0 <= i < len(grids[axis]):
                    continue
                point = list(winner_point)
                point[axis_pos] = i
                evaluate(tuple(point))

    winner = best_record()
    return TuningResult(
        best_params=winner["params"],
        mean_cv_auc=winner["mean_auc"],
        trail=tuple(
            {"params": r["params"], "fold_aucs": r["fold_aucs"], "mean_auc": r["mean_auc"]}
            for r in trail
        ),
    )
