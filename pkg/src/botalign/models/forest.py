"""Random forest of CART trees with weighted Gini/entropy splits.

Trees grow until nodes are pure or hold fewer than two distinct samples.
Split ties go to the lowest feature index, then the lowest threshold, so a
single tree without bootstrap over all features is a deterministic CART.
Each tree draws its randomness from ``(seed, tree_index)``; results do not
depend on the number of workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed

from .logreg import ClassWeight

_TIE_EPS = 1e-12


class Criterion(str, Enum):
    GINI = "gini"
    ENTROPY = "entropy"


class MaxFeatures(str, Enum):
    SQRT = "sqrt"
    LOG2 = "log2"
    ALL = "all"

    def count(self, d: int) -> int:
        if self is MaxFeatures.SQRT:
            return max(1, int(math.sqrt(d)))
        if self is MaxFeatures.LOG2:
            return max(1, int(math.log2(d))) if d > 1 else 1
        return d


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 1000
    class_weight: ClassWeight = ClassWeight.NONE
    criterion: Criterion = Criterion.GINI
    max_features: MaxFeatures = MaxFeatures.SQRT
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "class_weight", ClassWeight(self.class_weight))
        object.__setattr__(self, "criterion", Criterion(self.criterion))
        object.__setattr__(self, "max_features", MaxFeatures(self.max_features))
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1")

    def to_dict(self) -> dict:
        return {"n_trees": self.n_trees, "class_weight": self.class_weight.value,
                "criterion": self.criterion.value, "max_features": self.max_features.value,
                "bootstrap": self.bootstrap, "seed": self.seed}


def full_grid(n_trees: int = 1000, seed: int = 0) -> list[ForestConfig]:
    """Class weight x criterion x max features x bootstrap, in that nesting order."""
    return [
        ForestConfig(n_trees, w, c, m, b, seed)
        for w in (ClassWeight.NONE, ClassWeight.BALANCED, ClassWeight.BALANCED_SUBSAMPLE)
        for c in (Criterion.GINI, Criterion.ENTROPY)
        for m in (MaxFeatures.SQRT, MaxFeatures.LOG2, MaxFeatures.ALL)
        for b in (True, False)
    ]


@dataclass
class Tree:
    """Flat tree arrays; ``feature == -1`` marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    importance: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            go_left = X[rows, np.where(active, f, 0)] <= self.threshold[node]
            node = np.where(active, np.where(go_left, self.left[node], self.right[node]), node)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {"feature": self.feature.tolist(), "threshold": self.threshold.tolist(),
                "left": self.left.tolist(), "right": self.right.tolist(),
                "value": self.value.tolist(), "importance": self.importance.tolist()}

    @classmethod
    def from_dict(cls, obj: dict) -> "Tree":
        return cls(np.asarray(obj["feature"], dtype=np.int64),
                   np.asarray(obj["threshold"], dtype=float),
                   np.asarray(obj["left"], dtype=np.int64),
                   np.asarray(obj["right"], dtype=np.int64),
                   np.asarray(obj["value"], dtype=np.int64),
                   np.asarray(obj["importance"], dtype=float))


def _impurity_sum(a: np.ndarray, b: np.ndarray, criterion: Criterion) -> np.ndarray:
    """Node weight times impurity, for class weight totals ``a`` and ``b``."""
    n = a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        if criterion is Criterion.GINI:
            out = n - (a * a + b * b) / n
        else:
            pa, pb = a / n, b / n
            out = -n * (np.where(pa > 0, pa * np.log2(pa), 0.0) + np.where(pb > 0, pb * np.log2(pb), 0.0))
    return np.where(n > 0, out, 0.0)


def grow_tree(X: np.ndarray, y: np.ndarray, counts: np.ndarray, class_weight: np.ndarray,
              criterion: Criterion, n_candidates: int, rng: np.random.Generator,
              tie_class: int = 0) -> Tree:
    """Grow one unpruned tree.

    ``counts`` holds each row's multiplicity (bootstrap draws, or all ones);
    rows with zero count are excluded. Sample weight is count times the
    weight of the row's class.
    """
    n, d = X.shape
    weight = counts * class_weight[y]
    w0 = np.where(y == 0, weight, 0.0)
    w1 = np.where(y == 1, weight, 0.0)
    feature, threshold, left, right, value = [], [], [], [], []
    importance = np.zeros(d)
    root = np.flatnonzero(counts > 0)
    root_weight = weight[root].sum()

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(tie_class)
        return len(feature) - 1

    stack = [(new_node(), root)]
    while stack:
        node, idx = stack.pop()
        t0, t1 = w0[idx].sum(), w1[idx].sum()
        value[node] = 1 if t1 > t0 else 0 if t0 > t1 else tie_class
        if t0 == 0 or t1 == 0 or len(idx) < 2:
            continue
        Xn = X[idx]
        varying = Xn.max(axis=0) > Xn.min(axis=0)
        if n_candidates >= d:
            cand = np.flatnonzero(varying)
        else:
            # constant features do not use up the candidate budget
            perm = rng.permutation(d)
            cand = np.sort(perm[varying[perm]][:n_candidates])
        if cand.size == 0:
            continue
        V = Xn[:, cand]
        order = np.argsort(V, axis=0, kind="stable")
        Vs = np.take_along_axis(V, order, axis=0)
        c0 = np.cumsum(w0[idx][order], axis=0)[:-1]
        c1 = np.cumsum(w1[idx][order], axis=0)[:-1]
        valid = Vs[1:] > Vs[:-1]
        if not valid.any():
            continue
        gain = (_impurity_sum(np.array(t0), np.array(t1), criterion)
                - _impurity_sum(c0, c1, criterion) - _impurity_sum(t0 - c0, t1 - c1, criterion))
        gain = np.where(valid, gain, -np.inf)
        best = gain.max()
        # column-major scan: lowest feature first, then lowest threshold
        hits = np.argwhere((gain >= best - _TIE_EPS * max(1.0, abs(best))).T)
        col, row = hits[0]
        f = int(cand[col])
        lo, hi = Vs[row, col], Vs[row + 1, col]
        thr = (lo + hi) / 2.0
        if not lo <= thr < hi:
            thr = lo
        mask = X[idx, f] <= thr
        feature[node] = f
        threshold[node] = float(thr)
        importance[f] += max(best, 0.0)
        l_node, r_node = new_node(), new_node()
        left[node], right[node] = l_node, r_node
        stack.append((r_node, idx[~mask]))
        stack.append((l_node, idx[mask]))
    return Tree(np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=float),
                np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
                np.asarray(value, dtype=np.int64),
                importance / root_weight if root_weight > 0 else importance)


def _balanced(y: np.ndarray, counts: np.ndarray) -> np.ndarray:
    totals = np.array([counts[y == 0].sum(), counts[y == 1].sum()], dtype=float)
    n = totals.sum()
    return np.where(totals > 0, n / (2 * np.where(totals > 0, totals, 1.0)), 0.0)


def _fit_one(X, y, cfg: ForestConfig, index: int, tie_class: int) -> Tree:
    rng = np.random.default_rng([cfg.seed, index])
    n = len(y)
    if cfg.bootstrap:
        counts = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
    else:
        counts = np.ones(n)
    if cfg.class_weight is ClassWeight.NONE:
        cw = np.ones(2)
    elif cfg.class_weight is ClassWeight.BALANCED:
        cw = _balanced(y, np.ones(n))
    else:
        cw = _balanced(y, counts)
    return grow_tree(X, y, counts, cw, cfg.criterion, cfg.max_features.count(X.shape[1]), rng, tie_class)


@dataclass
class ForestModel:
    trees: list[Tree]
    config: ForestConfig
    n_features: int
    tie_class: int
    kind: str = field(default="forest", init=False)

    def _check(self, X):
        X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"model expects {self.n_features} features, got {X.shape[-1]}")
        return X

    def votes(self, X) -> np.ndarray:
        """Number of trees voting for class 1, per row."""
        X = self._check(X)
        out = np.zeros(X.shape[0], dtype=np.int64)
        for t in self.trees:
            out += t.predict(X)
        return out

    def scores(self, X) -> np.ndarray:
        return self.votes(X) / len(self.trees)

    def predict(self, X) -> np.ndarray:
        v = 2 * self.votes(X)
        n = len(self.trees)
        return np.where(v > n, 1, np.where(v < n, 0, self.tie_class))

    @property
    def importances(self) -> np.ndarray:
        mean = np.mean([t.importance for t in self.trees], axis=0)
        total = mean.sum()
        return mean / total if total > 0 else mean

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "n_features": self.n_features,
                "tie_class": self.tie_class, "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, obj: dict) -> "ForestModel":
        return cls([Tree.from_dict(t) for t in obj["trees"]], ForestConfig(**obj["config"]),
                   int(obj["n_features"]), int(obj["tie_class"]))


def train_forest(X, y, cfg: ForestConfig = ForestConfig(), n_jobs: int = 1) -> ForestModel:
    X = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)
    y = np.asarray(y).astype(int)
    if X.shape[0] != len(y):
        raise ValueError("X and y differ in length")
    if not np.all(np.isfinite(X)):
        raise ValueError("non-finite feature value")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels contain a single class")
    n1 = int(y.sum())
    tie_class = 1 if n1 > len(y) - n1 else 0
    if n_jobs == 1:
        trees = [_fit_one(X, y, cfg, t, tie_class) for t in range(cfg.n_trees)]
    else:
        trees = Parallel(n_jobs=n_jobs)(
            delayed(_fit_one)(X, y, cfg, t, tie_class) for t in range(cfg.n_trees))
    return ForestModel(trees, cfg, X.shape[1], tie_class)
