"""8-10-1 sigmoid network trained by full-batch backpropagation on MSE."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .risk import RiskAssessment, Stage, ann_level
from .svm import fit_bounds, scale_features

N_IN, N_HIDDEN, N_OUT = 8, 10, 1


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass(frozen=True)
class MlpModel:
    w1: np.ndarray  # (8, 10)
    b1: np.ndarray  # (10,)
    w2: np.ndarray  # (10, 1)
    b2: np.ndarray  # (1,)
    feature_min: np.ndarray
    feature_max: np.ndarray
    seed: int = 0
    learning_rate: float = 0.5
    epochs: int = 0

    def __post_init__(self):
        if (self.w1.shape != (N_IN, N_HIDDEN) or self.b1.shape != (N_HIDDEN,)
                or self.w2.shape != (N_HIDDEN, N_OUT) or self.b2.shape != (N_OUT,)):
            raise ValueError("MLP must have an exact 8-10-1 topology")
        if not all(np.all(np.isfinite(a)) for a in (self.w1, self.b1, self.w2, self.b2)):
            raise ValueError("MLP weights must be finite")


def init_model(seed: int, feature_min=None, feature_max=None) -> MlpModel:
    rng = np.random.default_rng(seed)
    w1 = rng.uniform(-0.5, 0.5, (N_IN, N_HIDDEN))
    b1 = rng.uniform(-0.5, 0.5, N_HIDDEN)
    w2 = rng.uniform(-0.5, 0.5, (N_HIDDEN, N_OUT))
    b2 = rng.uniform(-0.5, 0.5, N_OUT)
    fmin = np.full(N_IN, -1.0) if feature_min is None else np.asarray(feature_min, float)
    fmax = np.full(N_IN, 1.0) if feature_max is None else np.asarray(feature_max, float)
    return MlpModel(w1, b1, w2, b2, fmin, fmax, seed)


def _check_inputs(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != N_IN:
        raise ValueError(f"expected {N_IN} inputs, got {x.shape[-1]}")
    return x


def mlp_forward(model: MlpModel, x):
    """Output in (0, 1) for scaled inputs; accepts one vector or a batch."""
    x = _check_inputs(x)
    hidden = sigmoid(x @ model.w1 + model.b1)
    out = sigmoid(hidden @ model.w2 + model.b2)[..., 0]
    return float(out) if out.ndim == 0 else out


def mse_loss(model: MlpModel, X, y) -> float:
    out = mlp_forward(model, X)
    return float(0.5 * np.mean((out - np.asarray(y, dtype=np.float64)) ** 2))


def _backprop(w1, b1, w2, b2, X, y):
    n = len(X)
    hidden = sigmoid(X @ w1 + b1)
    out = sigmoid(hidden @ w2 + b2)
    d_out = (out - y) * out * (1.0 - out) / n
    d_hidden = (d_out @ w2.T) * hidden * (1.0 - hidden)
    return X.T @ d_hidden, d_hidden.sum(axis=0), hidden.T @ d_out, d_out.sum(axis=0)


def gradients(model: MlpModel, X, y) -> dict[str, np.ndarray]:
    """Backpropagated gradients of ``mse_loss``."""
    X = _check_inputs(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    g = _backprop(model.w1, model.b1, model.w2, model.b2, X, y)
    return dict(zip(("w1", "b1", "w2", "b2"), g))


def train_mlp(X, y, lr: float = 0.5, epochs: int = 5000, seed: int = 0) -> MlpModel:
    """Learn input bounds from raw ``X``, then train on the scaled inputs."""
    X = _check_inputs(X)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("training set is empty")
    if len(X) != len(y):
        raise ValueError("samples and labels differ in length")
    fmin, fmax = fit_bounds(X)
    Xs = scale_features(X, fmin, fmax)
    model = replace(init_model(seed, fmin, fmax), learning_rate=lr, epochs=epochs)
    w1, b1, w2, b2 = model.w1.copy(), model.b1.copy(), model.w2.copy(), model.b2.copy()
    target = y.reshape(-1, 1)
    for _ in range(epochs):
        g1, gb1, g2, gb2 = _backprop(w1, b1, w2, b2, Xs, target)
        w1 -= lr * g1
        b1 -= lr * gb1
        w2 -= lr * g2
        b2 -= lr * gb2
    return replace(model, w1=w1, b1=b1, w2=w2, b2=b2)


def mlp_assess(model: MlpModel, x) -> RiskAssessment:
    """Assess one raw 8-feature vector."""
    x = _check_inputs(x)
    out = mlp_forward(model, scale_features(x, model.feature_min, model.feature_max))
    return RiskAssessment(100.0 * out, ann_level(out), Stage.ANN, out)
