"""The five model families behind one train / predict-probability contract.

Every trained model exposes ``classes``, ``n_features``, and
``predict_proba``; models with a pre-softmax margin additionally expose
``decision_scores`` (the explanation module attributes in that space).
Use :func:`predict_proba` for the checked uniform entry point.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch
from .fnn import FnnConfig, FnnModel, init_fnn, train_fnn
from .forest import ForestModel, train_random_forest
from .gbdt import GbdtModel, GbdtParams, train_gbdt
from .io import deserialize_model, load_model, save_model, serialize_model
from .linear import (
    DummyPriorModel,
    LinearModel,
    NaiveBayesModel,
    train_dummy,
    train_logreg,
    train_naive_bayes,
)
from .trees import Tree

__all__ = [
    "DummyPriorModel",
    "FnnConfig",
    "FnnModel",
    "ForestModel",
    "GbdtModel",
    "GbdtParams",
    "LinearModel",
    "NaiveBayesModel",
    "Tree",
    "deserialize_model",
    "init_fnn",
    "load_model",
    "predict_proba",
    "save_model",
    "serialize_model",
    "train_dummy",
    "train_fnn",
    "train_gbdt",
    "train_logreg",
    "train_naive_bayes",
    "train_random_forest",
]


def predict_proba(model, X: np.ndarray) -> np.ndarray:
    """Class probabilities from any trained model, dimension-checked.

    Raises:
        DimensionMismatch: column count differs from training width.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-dimensional")
    if X.shape[1] != model.n_features:
        raise DimensionMismatch(model.n_features, X.shape[1])
    return model.predict_proba(X)
