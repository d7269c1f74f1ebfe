from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp


class Normalization(str, Enum):
    STANDARDIZE = "standardize"
    UNIT = "unit_normalize"
    NONE = "none"


@dataclass(frozen=True)
class Normalizer:
    """Column standardizer, row L2 normalizer, or identity.

    Standardization statistics come from the training matrix only; constant
    columns map to 0. Standardizing a sparse matrix yields a dense one.
    """

    kind: Normalization
    n_features: int
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def apply(self, X):
        if X.shape[1] != self.n_features:
            raise ValueError(f"normalizer expects {self.n_features} columns, got {X.shape[1]}")
        if self.kind is Normalization.STANDARDIZE:
            dense = X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)
            safe = np.where(self.std > 0, self.std, 1.0)
            return np.where(self.std > 0, (dense - self.mean) / safe, 0.0)
        if self.kind is Normalization.UNIT:
            if sp.issparse(X):
                norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
                norms[norms == 0] = 1.0
                return sp.diags(1.0 / norms) @ X
            X = np.asarray(X, dtype=float)
            norms = np.linalg.norm(X, axis=1, keepdims=True)
            return X / np.where(norms > 0, norms, 1.0)
        return X

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_features": self.n_features,
            "mean": None if self.mean is None else self.mean.tolist(),
            "std": None if self.std is None else self.std.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Normalizer":
        arr = lambda v: None if v is None else np.asarray(v, dtype=float)  # noqa: E731
        return cls(Normalization(obj["kind"]), int(obj["n_features"]), arr(obj["mean"]), arr(obj["std"]))


def fit_normalizer(X, kind: Normalization | str) -> Normalizer:
    kind = Normalization(kind)
    if X.shape[0] == 0:
        raise ValueError("cannot fit a normalizer on an empty matrix")
    if kind is not Normalization.STANDARDIZE:
        return Normalizer(kind, X.shape[1])
    if sp.issparse(X):
        mean = np.asarray(X.mean(axis=0)).ravel()
        sq = np.asarray(X.multiply(X).mean(axis=0)).ravel()
        std = np.sqrt(np.maximum(sq - mean**2, 0.0))
    else:
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
    # float noise on constant columns must not blow up into huge z-scores
    std = np.where(std > 1e-12 * np.maximum(1.0, np.abs(mean)), std, 0.0)
    return Normalizer(kind, X.shape[1], mean, std)
