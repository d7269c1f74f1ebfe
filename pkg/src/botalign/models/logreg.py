"""L2-regularized logistic regression.

Minimizes ``0.5*||w||^2 + C * sum_i s_i * log(1 + exp(-y_i (w.x_i + b)))``
with labels ``y_i`` in {-1, +1}; the intercept is not penalized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import LinearOperator, cg
from scipy.special import expit

from .normalize import Normalization, Normalizer, fit_normalizer

log = logging.getLogger(__name__)

C_GRID = (0.0001, 0.001, 0.01, 0.1, 1.0, 10.0)


class ClassWeight(str, Enum):
    NONE = "none"
    BALANCED = "balanced"
    BALANCED_SUBSAMPLE = "balanced_subsample"


@dataclass(frozen=True)
class LogRegConfig:
    c_value: float = 1.0
    class_weight: ClassWeight = ClassWeight.NONE
    normalization: Normalization = Normalization.NONE
    max_iterations: int = 10000
    gradient_tolerance: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "class_weight", ClassWeight(self.class_weight))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        if not self.c_value > 0:
            raise ValueError("c_value must be positive")
        if self.class_weight is ClassWeight.BALANCED_SUBSAMPLE:
            raise ValueError("balanced_subsample applies to forests only")

    def to_dict(self) -> dict:
        return {"c_value": self.c_value, "class_weight": self.class_weight.value,
                "normalization": self.normalization.value,
                "max_iterations": self.max_iterations,
                "gradient_tolerance": self.gradient_tolerance}


def full_grid(**overrides) -> list[LogRegConfig]:
    """C x class weight x normalization, in that nesting order."""
    return [
        LogRegConfig(c, w, n, **overrides)
        for c in C_GRID
        for w in (ClassWeight.NONE, ClassWeight.BALANCED)
        for n in (Normalization.STANDARDIZE, Normalization.UNIT, Normalization.NONE)
    ]


def sample_weights(y: np.ndarray, kind: ClassWeight) -> np.ndarray:
    """Per-sample weights; balanced gives each sample n / (2 * n_its_class)."""
    y = np.asarray(y)
    if kind is ClassWeight.NONE:
        return np.ones(len(y))
    n = len(y)
    counts = {c: int(np.sum(y == c)) for c in np.unique(y)}
    return np.array([n / (2 * counts[c]) for c in y], dtype=float)


@dataclass
class LogisticModel:
    weights: np.ndarray
    intercept: float
    normalizer: Normalizer
    config: LogRegConfig
    classes: tuple[int, ...] = (0, 1)
    converged: bool = True
    n_iterations: int = 0
    kind: str = field(default="logreg", init=False)

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def decision_function(self, X) -> np.ndarray:
        if X.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {X.shape[1]}")
        Z = self.normalizer.apply(X)
        return np.asarray(Z @ self.weights).ravel() + self.intercept

    def scores(self, X) -> np.ndarray:
        """P(class 1) = sigmoid(w.x + b)."""
        return expit(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        # a score of exactly 0.5 resolves to class 0
        return (self.decision_function(X) > 0).astype(int)

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "intercept": self.intercept,
                "normalizer": self.normalizer.to_dict(), "config": self.config.to_dict(),
                "converged": self.converged, "n_iterations": self.n_iterations}

    @classmethod
    def from_dict(cls, obj: dict) -> "LogisticModel":
        return cls(np.asarray(obj["weights"], dtype=float), float(obj["intercept"]),
                   Normalizer.from_dict(obj["normalizer"]), LogRegConfig(**obj["config"]),
                   converged=obj.get("converged", True), n_iterations=obj.get("n_iterations", 0))


def _check_xy(X, y):
    y = np.asarray(y).astype(int)
    if X.shape[0] != len(y):
        raise ValueError("X and y differ in length")
    vals = X.data if sp.issparse(X) else np.asarray(X)
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite feature value")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels contain a single class")
    if not set(np.unique(y)) <= {0, 1}:
        raise ValueError("labels must be 0/1")
    return y


def objective(theta: np.ndarray, Z, ypm: np.ndarray, s: np.ndarray, c_value: float):
    """J/C and its gradient; dividing by C keeps the intercept gradient
    from vanishing as C shrinks."""
    w, b = theta[:-1], theta[-1]
    m = ypm * (np.asarray(Z @ w).ravel() + b)
    f = 0.5 * (w @ w) / c_value + np.sum(s * np.logaddexp(0.0, -m))
    r = -s * ypm * expit(-m)
    gw = w / c_value + np.asarray(Z.T @ r).ravel()
    return f, np.append(gw, r.sum())


def _column_sq(Z, D: np.ndarray) -> np.ndarray:
    if sp.issparse(Z):
        return np.asarray(Z.multiply(Z).T @ D).ravel()
    return (Z * Z).T @ D


def train_logreg(X, y, cfg: LogRegConfig = LogRegConfig(), x0: np.ndarray | None = None) -> LogisticModel:
    """Fit by Newton's method with Jacobi-preconditioned CG steps.

    Convergence requires the gradient of ``J/C`` to fall within
    ``cfg.gradient_tolerance`` (sup norm). ``x0`` optionally gives the
    starting ``(w, b)``.
    """
    y = _check_xy(X, y)
    norm = fit_normalizer(X, cfg.normalization)
    Z = norm.apply(X)
    if not sp.issparse(Z):
        Z = np.asarray(Z, dtype=float)
    ypm = np.where(y == 1, 1.0, -1.0)
    s = sample_weights(y, cfg.class_weight)
    C = cfg.c_value
    d = Z.shape[1]

    theta = np.zeros(d + 1) if x0 is None else np.asarray(x0, dtype=float).copy()
    f, g = objective(theta, Z, ypm, s, C)
    converged = False
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        gmax = np.max(np.abs(g))
        if gmax <= cfg.gradient_tolerance:
            converged = True
            break
        p = expit(np.asarray(Z @ theta[:-1]).ravel() + theta[-1])
        D = s * p * (1 - p)

        def hv(v, D=D):
            zv = np.asarray(Z @ v[:-1]).ravel() + v[-1]
            Dzv = D * zv
            return np.append(v[:-1] / C + np.asarray(Z.T @ Dzv).ravel(), Dzv.sum())

        diag = np.append(1.0 / C + _column_sq(Z, D), D.sum())
        H = LinearOperator((d + 1, d + 1), matvec=hv, dtype=float)
        M = LinearOperator((d + 1, d + 1), matvec=lambda v, diag=diag: v / diag, dtype=float)
        step, _ = cg(H, -g, rtol=min(0.1, np.sqrt(gmax)) * 1e-2, atol=0.0,
                     maxiter=max(50, 2 * (d + 1)), M=M)
        t = 1.0
        while True:
            cand = theta + t * step
            fc, gc = objective(cand, Z, ypm, s, C)
            # at the limit of float precision f stops moving; fall back to
            # accepting steps that shrink the gradient
            if fc <= f + 1e-4 * t * (g @ step) or np.max(np.abs(gc)) < gmax:
                break
            t *= 0.5
            if t < 1e-10:
                break
        if t < 1e-10:
            break
        theta, f, g = cand, fc, gc
    else:
        converged = bool(np.max(np.abs(g)) <= cfg.gradient_tolerance)
    if not converged:
        log.warning("logistic regression stopped with gradient %.3g > %.3g (C=%g)",
                    np.max(np.abs(g)), cfg.gradient_tolerance, C)
    return LogisticModel(theta[:-1].copy(), float(theta[-1]), norm, cfg,
                         converged=converged, n_iterations=it)


