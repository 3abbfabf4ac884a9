"""Per-candidate regression training: mini-batch Adam on the squared error,
plus the MSE / R-squared evaluation metrics.

Training is deterministic: parameters start at zero, each epoch shuffles the
training rows with ``default_rng(shuffle_seed + epoch)``, batches are taken
in order (the last short batch is kept), and each batch performs one Adam
step on the mean-of-batch gradient.  "epochs" counts passes over the
training split, one Adam step per mini-batch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Ansatz
from .errors import ConfigurationError, DimensionError
from .simulator import batch_loss_gradient, predict_batch

__all__ = ["TrainConfig", "Metrics", "TrainResult", "AdamState", "mse", "r2", "evaluate", "train"]


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 200
    batch_size: int = 25
    learning_rate: float = 1e-2
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ConfigurationError(f"learning_rate must be > 0, got {self.learning_rate}")


@dataclass(frozen=True)
class Metrics:
    mse: float
    r2: float


@dataclass
class TrainResult:
    params: np.ndarray
    history: np.ndarray  # mean train loss per epoch
    train: Metrics
    val: Metrics


def mse(y_true, y_pred) -> float:
    """Mean of squared residuals."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DimensionError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size == 0:
        raise DimensionError("mse of empty vectors is undefined")
    r = y_true - y_pred
    return float(r @ r) / y_true.size


def r2(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DimensionError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    if y_true.size < 2:
        raise DimensionError("r2 needs at least 2 samples")
    centered = y_true - y_true.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        raise ValueError("r2 is undefined for constant y_true")
    resid = y_true - y_pred
    return 1.0 - float(resid @ resid) / ss_tot


@dataclass
class AdamState:
    """First/second moment accumulators with bias correction."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(np.zeros(n), np.zeros(n))

    def step(self, params: np.ndarray, grad: np.ndarray, cfg: TrainConfig) -> np.ndarray:
        self.t += 1
        b1, b2 = cfg.adam_beta1, cfg.adam_beta2
        self.m = b1 * self.m + (1.0 - b1) * grad
        self.v = b2 * self.v + (1.0 - b2) * (grad * grad)
        m_hat = self.m / (1.0 - b1 ** self.t)
        v_hat = self.v / (1.0 - b2 ** self.t)
        return params - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def evaluate(a: Ansatz, params, X, y) -> Metrics:
    preds = predict_batch(a, params, X)
    return Metrics(mse=mse(y, preds), r2=r2(y, preds))


def train(a: Ansatz, train_set, val_set, cfg: TrainConfig) -> TrainResult:
    """Fit the ansatz parameters on ``train_set`` and report metrics on both splits.

    ``train_set`` and ``val_set`` are ``(X, y)`` pairs with rows scaled to
    [-1, 1].  Parameters are initialized to zero.
    """
    X, y = (np.asarray(v, dtype=np.float64) for v in train_set)
    Xv, yv = (np.asarray(v, dtype=np.float64) for v in val_set)
    if X.shape[0] == 0:
        raise ConfigurationError("training set is empty")
    if X.shape[0] != y.shape[0]:
        raise DimensionError(f"{X.shape[0]} rows but {y.shape[0]} targets")

    n = X.shape[0]
    params = np.zeros(a.n_params)
    adam = AdamState.zeros(a.n_params)
    history = np.empty(cfg.epochs)
    for epoch in range(cfg.epochs):
        order = np.random.default_rng(cfg.shuffle_seed + epoch).permutation(n)
        sq_sum = 0.0
        for lo in range(0, n, cfg.batch_size):
            rows = order[lo : lo + cfg.batch_size]
            loss, grad, _ = batch_loss_gradient(a, params, X[rows], y[rows])
            sq_sum += loss * rows.size
            params = adam.step(params, grad, cfg)
        history[epoch] = sq_sum / n

    return TrainResult(
        params=params,
        history=history,
        train=evaluate(a, params, X, y),
        val=evaluate(a, params, Xv, yv),
    )
