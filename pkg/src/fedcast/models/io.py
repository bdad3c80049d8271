"""Versioned JSON serialization for every trained model family.

Floats survive the JSON round trip bit-exactly (shortest-repr encoding),
so a reloaded model reproduces its predictions identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ParseError
from .fnn import FnnConfig, FnnModel
from .forest import ForestModel
from .gbdt import GbdtModel, GbdtParams
from .linear import DummyPriorModel, LinearModel, NaiveBayesModel
from .trees import Tree

FORMAT_VERSION = 1


def serialize_model(model, feature_names=()) -> dict:
    """Model -> JSON-ready payload with the envelope fields."""
    payload = {
        "format_version": FORMAT_VERSION,
        "model_kind": model.model_kind,
        "class_names": list(model.classes),
        "feature_names": list(feature_names),
        "seed": getattr(model, "seed", None),
    }
    if isinstance(model, GbdtModel):
        payload["hyperparams"] = model.params.to_dict()
        payload["parameters"] = {
            "f0": model.f0.tolist(),
            "trees": [[t.to_payload() for t in stage] for stage in model.trees],
            "feature_count": model.feature_count,
            "train_deviance": list(model.train_deviance),
        }
    elif isinstance(model, ForestModel):
        payload["hyperparams"] = {
            "mode": model.mode,
            "n_trees": len(model.trees),
            "max_depth": model.max_depth,
            "min_samples_leaf": model.min_samples_leaf,
            "min_samples_split": model.min_samples_split,
            "max_features": model.max_features,
        }
        payload["parameters"] = {
            "trees": [t.to_payload() for t in model.trees],
            "feature_count": model.feature_count,
        }
    elif isinstance(model, LinearModel):
        payload["hyperparams"] = {"l2": model.l2}
        payload["parameters"] = {"W": model.W.tolist(), "b": model.b.tolist()}
    elif isinstance(model, NaiveBayesModel):
        payload["hyperparams"] = {"alpha": model.alpha}
        payload["parameters"] = {
            "log_priors": model.log_priors.tolist(),
            "log_likelihoods": model.log_likelihoods.tolist(),
        }
    elif isinstance(model, FnnModel):
        payload["hyperparams"] = model.config.to_dict()
        payload["seed"] = model.config.seed
        payload["parameters"] = {
            "weights": [W.tolist() for W in model.weights],
            "biases": [b.tolist() for b in model.biases],
            "best_epoch": model.best_epoch,
        }
    elif isinstance(model, DummyPriorModel):
        payload["hyperparams"] = {}
        payload["parameters"] = {
            "priors": model.priors.tolist(),
            "feature_count": model.feature_count,
        }
    else:
        raise TypeError(f"cannot serialize model of type {type(model).__name__}")
    return payload


def deserialize_model(payload: dict):
    """Payload -> (model, feature_names)."""
    if payload.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported model format version {payload.get('format_version')!r}")
    kind = payload["model_kind"]
    classes = tuple(payload["class_names"])
    feature_names = tuple(payload["feature_names"])
    hp = payload["hyperparams"]
    pr = payload["parameters"]

    if kind == "gbdt":
        mf = hp["max_features"]
        params = GbdtParams(
            n_estimators=hp["n_estimators"],
            learning_rate=hp["learning_rate"],
            max_depth=hp["max_depth"],
            max_features=mf,
            min_samples_leaf=hp["min_samples_leaf"],
            min_samples_split=hp["min_samples_split"],
        )
        model = GbdtModel(
            classes=classes,
            f0=np.asarray(pr["f0"], dtype=float),
            trees=[[Tree.from_payload(t) for t in stage] for stage in pr["trees"]],
            params=params,
            feature_count=pr["feature_count"],
            seed=payload["seed"],
            train_deviance=tuple(pr["train_deviance"]),
        )
    elif kind == "forest":
        model = ForestModel(
            classes=classes,
            trees=[Tree.from_payload(t) for t in pr["trees"]],
            mode=hp["mode"],
            feature_count=pr["feature_count"],
            seed=payload["seed"],
            max_depth=hp["max_depth"],
            min_samples_leaf=hp["min_samples_leaf"],
            min_samples_split=hp["min_samples_split"],
            max_features=hp["max_features"],
        )
    elif kind == "logreg":
        model = LinearModel(
            classes=classes,
            W=np.asarray(pr["W"], dtype=float),
            b=np.asarray(pr["b"], dtype=float),
            l2=hp["l2"],
            seed=payload["seed"],
        )
    elif kind == "naive_bayes":
        model = NaiveBayesModel(
            classes=classes,
            log_priors=np.asarray(pr["log_priors"], dtype=float),
            log_likelihoods=np.asarray(pr["log_likelihoods"], dtype=float),
            alpha=hp["alpha"],
        )
    elif kind == "fnn":
        config = FnnConfig(
            hidden=tuple(hp["hidden"]),
            lr=hp["lr"],
            epochs=hp["epochs"],
            batch_size=hp["batch_size"],
            seed=hp["seed"],
            early_stop_patience=hp["early_stop_patience"],
        )
        model = FnnModel(
            classes=classes,
            weights=[np.asarray(W, dtype=float) for W in pr["weights"]],
            biases=[np.asarray(b, dtype=float) for b in pr["biases"]],
            config=config,
            best_epoch=pr.get("best_epoch", -1),
        )
    elif kind == "dummy":
        model = DummyPriorModel(
            classes=classes,
            priors=np.asarray(pr["priors"], dtype=float),
            feature_count=pr["feature_count"],
        )
    else:
        raise ParseError(f"unknown model_kind {kind!r}")
    return model, feature_names


def save_model(model, path: str | Path, feature_names=()) -> None:
    Path(path).write_text(
        json.dumps(serialize_model(model, feature_names), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def load_model(path: str | Path):
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return deserialize_model(payload)
