from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class BaselineKind(str, Enum):
    MOST_FREQUENT = "most_frequent"
    MOST_INFREQUENT = "most_infrequent"
    STRATIFIED = "stratified"


@dataclass
class BaselineModel:
    """Feature-blind predictor. Ties between class counts resolve to class 0."""

    kind: str
    constant: int | None = None
    prior: float = 0.0  # P(class 1) for stratified draws
    seed: int = 0

    def predict(self, X) -> np.ndarray:
        n = X.shape[0]
        if self.kind == BaselineKind.STRATIFIED.value:
            # fresh generator per call: same seed, same X -> same labels
            rng = np.random.default_rng(self.seed)
            return (rng.random(n) < self.prior).astype(int)
        return np.full(n, self.constant, dtype=int)

    def scores(self, X) -> np.ndarray:
        return np.full(X.shape[0], self.prior if self.constant is None else float(self.constant))

    def to_dict(self) -> dict:
        return {"constant": self.constant, "prior": self.prior, "seed": self.seed}


def train_baselines(y, seed: int = 0) -> dict[str, BaselineModel]:
    y = np.asarray(y).astype(int)
    if len(y) == 0:
        raise ValueError("baselines need at least one training label")
    n1 = int(y.sum())
    n0 = len(y) - n1
    most = 1 if n1 > n0 else 0
    least = 1 if n1 < n0 else 0
    prior = n1 / len(y)
    return {
        BaselineKind.MOST_FREQUENT.value: BaselineModel(BaselineKind.MOST_FREQUENT.value, most, prior, seed),
        BaselineKind.MOST_INFREQUENT.value: BaselineModel(BaselineKind.MOST_INFREQUENT.value, least, prior, seed),
        BaselineKind.STRATIFIED.value: BaselineModel(BaselineKind.STRATIFIED.value, None, prior, seed),
    }
