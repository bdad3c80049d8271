"""Feedforward classifier: two ReLU hidden layers, softmax output, Adam.

Written directly in numpy so gradients are explicit and checkable
against finite differences. He-uniform initialization, class-weighted
cross-entropy, per-epoch seeded shuffling, and optional early stopping
on validation macro one-vs-rest AUC with best-epoch restoration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import NonFiniteFeature, NonFiniteLoss, SingleClass
from ..metrics import roc_auc_ovr


@dataclass(frozen=True)
class FnnConfig:
    hidden: tuple[int, ...] = (64, 32)
    lr: float = 1e-3
    epochs: int = 200
    batch_size: int = 16
    seed: int = 0
    early_stop_patience: int = 10
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def to_dict(self) -> dict:
        return {
            "hidden": list(self.hidden),
            "lr": self.lr,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "seed": self.seed,
            "early_stop_patience": self.early_stop_patience,
        }


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


@dataclass
class FnnModel:
    classes: tuple[str, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: FnnConfig
    best_epoch: int = -1

    model_kind = "fnn"

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        a = np.asarray(X, dtype=float)
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ W + b
            if i < last:
                a = _relu(a)
        return a

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _softmax(self.decision_scores(X))

    def loss(self, X: np.ndarray, y_idx: np.ndarray, sample_weight: np.ndarray) -> float:
        P = self.predict_proba(X)
        picked = np.clip(P[np.arange(len(y_idx)), y_idx], 1e-300, None)
        return float(-(sample_weight * np.log(picked)).sum() / sample_weight.sum())

    def gradients(
        self, X: np.ndarray, y_idx: np.ndarray, sample_weight: np.ndarray
    ) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Full-batch gradients of the weighted cross-entropy."""
        X = np.asarray(X, dtype=float)
        n = X.shape[0]
        last = len(self.weights) - 1
        activations = [X]
        a = X
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ W + b
            a = _relu(z) if i < last else z
            activations.append(a)
        P = _softmax(activations[-1])

        onehot = np.zeros_like(P)
        onehot[np.arange(n), y_idx] = 1.0
        w_norm = sample_weight / sample_weight.sum()
        delta = (P - onehot) * w_norm[:, None]

        grads_W: list[np.ndarray] = [np.empty(0)] * len(self.weights)
        grads_b: list[np.ndarray] = [np.empty(0)] * len(self.biases)
        for i in range(last, -1, -1):
            grads_W[i] = activations[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (activations[i] > 0)
        return grads_W, grads_b

    def copy_parameters(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return [W.copy() for W in self.weights], [b.copy() for b in self.biases]


def init_fnn(
    n_features: int, classes: Sequence[str], config: FnnConfig
) -> FnnModel:
    """He-uniform initialized network; biases start at zero."""
    rng = np.random.default_rng(config.seed)
    sizes = [n_features, *config.hidden, len(classes)]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return FnnModel(classes=tuple(classes), weights=weights, biases=biases, config=config)


def train_fnn(
    X: np.ndarray,
    y: list[str] | np.ndarray,
    class_weights: Mapping[str, float] | None = None,
    config: FnnConfig = FnnConfig(),
    validation: tuple[np.ndarray, Sequence[str]] | None = None,
    classes: Sequence[str] | None = None,
) -> FnnModel:
    """Adam on class-weighted cross-entropy.

    With ``validation`` given, training stops once validation macro
    OvR AUC fails to improve for ``early_stop_patience`` epochs and the
    best-epoch parameters are restored. ``epochs=0`` returns the
    initialization untouched. ``classes`` widens the output layer
    beyond the labels present (e.g. constant-label data).

    Raises:
        SingleClass, NonFiniteFeature, NonFiniteLoss.
    """
    X = np.asarray(X, dtype=float)
    if not np.all(np.isfinite(X)):
        raise NonFiniteFeature("X contains non-finite entries")
    y = list(y)
    classes = tuple(sorted(set(y))) if classes is None else tuple(sorted(classes))
    if len(classes) < 2:
        raise SingleClass("need at least 2 classes")
    if not set(y) <= set(classes):
        raise ValueError("labels outside the provided class set")
    n = X.shape[0]
    if not 1 <= config.batch_size <= n:
        raise ValueError(f"batch_size must be in [1, {n}]")
    class_index = {c: k for k, c in enumerate(classes)}
    y_idx = np.asarray([class_index[c] for c in y])
    w = np.asarray(
        [1.0 if class_weights is None else class_weights[c] for c in y], dtype=float
    )

    model = init_fnn(X.shape[1], classes, config)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed).spawn(1)[0])

    params = model.weights + model.biases
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    t = 0

    best_auc = -np.inf
    best_params: tuple[list[np.ndarray], list[np.ndarray]] | None = None
    best_epoch = -1
    stale = 0

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            grads_W, grads_b = model.gradients(X[batch], y_idx[batch], w[batch])
            grads = grads_W + grads_b
            t += 1
            for p, g, ms, vs in zip(params, grads, m_state, v_state):
                ms *= config.beta1
                ms += (1 - config.beta1) * g
                vs *= config.beta2
                vs += (1 - config.beta2) * (g * g)
                m_hat = ms / (1 - config.beta1**t)
                v_hat = vs / (1 - config.beta2**t)
                p -= config.lr * m_hat / (np.sqrt(v_hat) + config.eps)

        epoch_loss = model.loss(X, y_idx, w)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLoss(f"training loss became non-finite at epoch {epoch}")

        if validation is not None:
            X_val, y_val = validation
            auc = roc_auc_ovr(list(y_val), model.predict_proba(np.asarray(X_val, dtype=float)), classes=classes)
            if auc > best_auc:
                best_auc = auc
                best_params = model.copy_parameters()
                best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if stale >= config.early_stop_patience:
                    break

    if best_params is not None:
        model.weights, model.biases = best_params
        model.best_epoch = best_epoch
    return model
