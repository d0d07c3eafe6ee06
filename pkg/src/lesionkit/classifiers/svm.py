"""Linear soft-margin SVM, recursive feature elimination and the min-max
feature scaling shared by both classifier stages."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .risk import RiskAssessment, Stage, svm_level


class TrainingDataError(ValueError):
    pass


class MissingFeatureError(KeyError):
    pass


def fit_bounds(X) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    return X.min(axis=0), X.max(axis=0)


def scale_features(F, fmin, fmax) -> np.ndarray:
    """Map each feature to [-1, 1] via 2 (F - min) / (max - min) - 1.

    Values outside the bounds clamp to the ends; a feature with max == min
    maps to 0.
    """
    F = np.asarray(F, dtype=np.float64)
    fmin = np.asarray(fmin, dtype=np.float64)
    fmax = np.asarray(fmax, dtype=np.float64)
    span = fmax - fmin
    flat = span == 0
    safe = np.where(flat, 1.0, span)
    with np.errstate(over="ignore"):  # tiny spans overflow to inf, then clamp
        out = 2.0 * (F - fmin) / safe - 1.0
    out = np.clip(out, -1.0, 1.0)
    return np.where(flat, 0.0, out)


@dataclass(frozen=True)
class SvmHyper:
    C: float = 1.0
    epochs: int = 4000
    learning_rate: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.C <= 0 or self.epochs < 1 or self.learning_rate <= 0:
            raise ValueError("C, epochs and learning_rate must be positive")


@dataclass(frozen=True)
class LinearSvmModel:
    selected: tuple[str, ...]
    weights: np.ndarray
    bias: float
    feature_min: np.ndarray
    feature_max: np.ndarray
    decision_lo: float
    decision_hi: float
    hyper: SvmHyper = field(default_factory=SvmHyper)

    def __post_init__(self):
        k = len(self.selected)
        if not (len(self.weights) == len(self.feature_min) == len(self.feature_max) == k):
            raise ValueError("weights, bounds and selected names must have equal length")
        if np.any(self.feature_max < self.feature_min):
            raise ValueError("feature_max must be >= feature_min")
        if not self.decision_hi > self.decision_lo:
            raise ValueError("decision_hi must exceed decision_lo")

    def decision(self, F) -> np.ndarray:
        x = scale_features(F, self.feature_min, self.feature_max)
        return x @ self.weights + self.bias

    def probability(self, F) -> np.ndarray:
        raw = self.decision(F)
        p = (raw - self.decision_lo) / (self.decision_hi - self.decision_lo)
        return np.clip(p, 0.0, 1.0)


def signed_labels(y) -> np.ndarray:
    y = np.asarray(y)
    if y.dtype == bool:
        y = y.astype(int)
    s = np.where(y > 0, 1.0, -1.0)
    if (s > 0).sum() == 0 or (s < 0).sum() == 0:
        raise TrainingDataError("training labels contain a single class")
    return s


def svm_objective(w, b, Xs, y_signed, C: float) -> float:
    """lambda/2 |w|^2 + mean hinge loss, with lambda = 1 / (C n)."""
    Xs = np.asarray(Xs, dtype=np.float64)
    n = len(Xs)
    lam = 1.0 / (C * n)
    margins = y_signed * (Xs @ np.asarray(w) + b)
    return float(0.5 * lam * np.dot(w, w) + np.maximum(0.0, 1.0 - margins).mean())


def fit_linear_svm(Xs, y_signed, hyper: SvmHyper) -> tuple[np.ndarray, float]:
    """Full-batch subgradient descent from the origin with step
    ``lr / sqrt(epoch + 1)``; returns the best iterate seen."""
    Xs = np.asarray(Xs, dtype=np.float64)
    y = np.asarray(y_signed, dtype=np.float64)
    n, d = Xs.shape
    lam = 1.0 / (hyper.C * n)
    w = np.zeros(d)
    b = 0.0
    best = (svm_objective(w, b, Xs, y, hyper.C), w.copy(), b)
    for t in range(hyper.epochs):
        active = y * (Xs @ w + b) < 1.0
        gw = lam * w - (y[active, None] * Xs[active]).sum(axis=0) / n
        gb = -y[active].sum() / n
        eta = hyper.learning_rate / np.sqrt(t + 1.0)
        w = w - eta * gw
        b = b - eta * gb
        obj = svm_objective(w, b, Xs, y, hyper.C)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    return best[1], float(best[2])


def train_svm(X, y, hyper: SvmHyper | None = None, names=None) -> LinearSvmModel:
    """Learn scaling bounds from ``X``, then fit the SVM on scaled data.

    ``y`` is 1 for melanoma and 0 otherwise.
    """
    hyper = hyper or SvmHyper()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise TrainingDataError("samples must form a 2-D array")
    ys = signed_labels(y)
    if (ys > 0).sum() < 2 or (ys < 0).sum() < 2:
        raise TrainingDataError("need at least 2 samples per class")
    names = tuple(names) if names is not None else tuple(f"f{i}" for i in range(X.shape[1]))
    fmin, fmax = fit_bounds(X)
    Xs = scale_features(X, fmin, fmax)
    w, b = fit_linear_svm(Xs, ys, hyper)
    raw = Xs @ w + b
    lo, hi = float(raw.min()), float(raw.max())
    if not hi > lo:
        hi = lo + 1.0
    return LinearSvmModel(names, w, b, fmin, fmax, lo, hi, hyper)


@dataclass(frozen=True)
class RfeResult:
    selected: tuple[str, ...]
    trace: tuple[tuple[str, float], ...]


def svm_rfe(X, y, hyper: SvmHyper | None, target_count: int, names) -> RfeResult:
    """Drop the smallest-|weight| feature one at a time until
    ``target_count`` remain. Ties drop the later canonical feature."""
    hyper = hyper or SvmHyper()
    X = np.asarray(X, dtype=np.float64)
    names = tuple(names)
    if not 1 <= target_count < len(names):
        raise ValueError("target_count must lie in [1, feature count)")
    alive = list(range(len(names)))
    trace = []
    while len(alive) > target_count:
        model = train_svm(X[:, alive], y, hyper, [names[i] for i in alive])
        mags = np.abs(model.weights)
        low = mags.min()
        pos = max(k for k in range(len(alive)) if mags[k] == low)
        trace.append((names[alive[pos]], float(low)))
        del alive[pos]
    return RfeResult(tuple(names[i] for i in alive), tuple(trace))


def _pick(model: LinearSvmModel, F) -> np.ndarray:
    if hasattr(F, "as_dict"):
        F = F.as_dict()
    try:
        return np.array([F[n] for n in model.selected], dtype=np.float64)
    except KeyError as exc:
        raise MissingFeatureError(f"feature {exc.args[0]!r} required by the model is missing") from None


def svm_assess(model: LinearSvmModel, F) -> RiskAssessment:
    p = float(model.probability(_pick(model, F)))
    return RiskAssessment(100.0 * p, svm_level(p), Stage.SVM)
