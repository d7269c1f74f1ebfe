"""Grid search, source-to-target experiments and the cross-dataset matrix."""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

from ..corpus import CorpusSet, Label
from ..features import EmbeddingTable, FeatureFamily, FeatureMatrix, Featurizer, Variant
from ..lexicon import Lexicon
from ..models import (
    BaselineKind, ForestConfig, LogRegConfig, TrainedModel, model_to_dict, train_baselines,
    train_forest, train_logreg,
)
from .metrics import confusion, macro_f1, per_class_f1

log = logging.getLogger(__name__)

CLASSES = (Label.HUMAN_HUMAN, Label.HUMAN_BOT)


class ExperimentError(ValueError):
    pass


class ModelFamily(str, Enum):
    LOGREG = "logreg"
    FOREST = "forest"
    BASELINE = "baseline"


Config = Union[LogRegConfig, ForestConfig, BaselineKind]


def config_dict(cfg: Config) -> dict:
    if isinstance(cfg, BaselineKind):
        return {"baseline": cfg.value}
    return cfg.to_dict()


@dataclass(frozen=True)
class PipelineSpec:
    """One row of the results tables: features x variant x classifier grid.

    Content families pair with logistic regression and stylistic families
    with forests; ``allow_mismatch`` lifts that rule.
    """

    name: str
    family: FeatureFamily | None
    variant: Variant
    model: ModelFamily
    grid: tuple[Config, ...]
    allow_mismatch: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", ModelFamily(self.model))
        object.__setattr__(self, "variant", Variant(self.variant))
        if self.family is not None:
            object.__setattr__(self, "family", FeatureFamily(self.family))
        object.__setattr__(self, "grid", tuple(self.grid))
        if not self.grid:
            raise ExperimentError(f"{self.name}: empty configuration grid")
        want = {ModelFamily.LOGREG: LogRegConfig, ModelFamily.FOREST: ForestConfig,
                ModelFamily.BASELINE: BaselineKind}[self.model]
        if not all(isinstance(c, want) for c in self.grid):
            raise ExperimentError(f"{self.name}: grid entries must be {want.__name__}")
        if self.model is ModelFamily.BASELINE:
            return
        if self.family is None:
            raise ExperimentError(f"{self.name}: a feature family is required")
        expected = ModelFamily.LOGREG if self.family.is_content else ModelFamily.FOREST
        if self.model is not expected and not self.allow_mismatch:
            raise ExperimentError(
                f"{self.name}: {self.family.value} features pair with {expected.value}; "
                "set allow_mismatch to override")

    def to_dict(self) -> dict:
        return {"name": self.name, "family": self.family.value if self.family else None,
                "variant": self.variant.value, "model": self.model.value,
                "grid": [config_dict(c) for c in self.grid],
                "allow_mismatch": self.allow_mismatch}


@dataclass(frozen=True)
class Splits:
    name: str
    train: CorpusSet
    val: CorpusSet
    test: CorpusSet


@dataclass
class GridResult:
    chosen_index: int
    chosen: Config
    scores: list[float]
    model: TrainedModel


@dataclass
class TrainedPipeline:
    spec: PipelineSpec
    source: str
    featurizer: Featurizer | None
    model: TrainedModel
    chosen: Config
    grid_scores: list[float]
    seed: int

    def digest(self) -> str:
        """Hash of every fitted artifact (featurizer state and model)."""
        state = {"featurizer": self.featurizer.state() if self.featurizer else None,
                 "model": model_to_dict(self.model)}
        return hashlib.sha256(json.dumps(state, sort_keys=True).encode()).hexdigest()


@dataclass
class EvalReport:
    source: str
    target: str
    pipeline: str
    macro_f1: float
    per_class_f1: dict[str, float]
    confusion: dict[str, dict[str, int]]
    chosen_config: dict
    grid_scores: list[float]
    seeds: dict[str, int]
    n_test: int

    def to_dict(self) -> dict:
        return {
            "source": self.source, "target": self.target, "pipeline": self.pipeline,
            "macro_f1": self.macro_f1, "per_class_f1": self.per_class_f1,
            "confusion": self.confusion, "chosen_config": self.chosen_config,
            "grid_scores": self.grid_scores, "seeds": self.seeds, "n_test": self.n_test,
        }


def fit_model(X, y, cfg: Config, seed: int = 0, n_jobs: int = 1) -> TrainedModel:
    if isinstance(cfg, LogRegConfig):
        return train_logreg(X, y, cfg)
    if isinstance(cfg, ForestConfig):
        return train_forest(X, y, cfg, n_jobs=n_jobs)
    return train_baselines(y, seed)[BaselineKind(cfg).value]


def grid_search(train: FeatureMatrix, val: FeatureMatrix, spec: PipelineSpec,
                seed: int = 0, n_jobs: int = 1) -> GridResult:
    """Fit every grid config on ``train``; keep the best macro F1 on ``val``.

    Ties keep the earliest config in grid order.
    """
    if len(val.labels) == 0:
        raise ExperimentError(
            f"{spec.name}: validation split is empty; grid search needs in-domain "
            "train/validation splits (use a larger dataset or a single-config grid)")
    y_train, y_val = train.y, val.y
    best: GridResult | None = None
    scores: list[float] = []
    for k, cfg in enumerate(spec.grid):
        model = fit_model(train.rows, y_train, cfg, seed, n_jobs)
        score = macro_f1(y_val, model.predict(val.rows))
        scores.append(score)
        log.info("%s grid %d/%d %s -> %.4f", spec.name, k + 1, len(spec.grid), config_dict(cfg), score)
        if best is None or score > best.scores[best.chosen_index]:
            best = GridResult(k, cfg, scores, model)
    best.scores = scores
    return best


def _featurizer(spec: PipelineSpec, lexicon: Lexicon | None,
                embeddings: Mapping[str, EmbeddingTable] | None) -> Featurizer | None:
    if spec.model is ModelFamily.BASELINE:
        return None
    table = None
    if spec.family is FeatureFamily.EMBEDDING:
        table = (embeddings or {}).get(spec.variant.value)
        if table is None:
            raise ExperimentError(f"{spec.name}: no embedding sidecar for variant {spec.variant.value!r}")
    return Featurizer(spec.family, spec.variant, lexicon=lexicon, embeddings=table)


def _empty_matrix(corpus: CorpusSet) -> FeatureMatrix:
    return FeatureMatrix([], np.zeros((len(corpus), 0)), list(corpus.labels), [d.id for d in corpus])


def train_pipeline(source: Splits, spec: PipelineSpec, lexicon: Lexicon | None = None,
                   embeddings: Mapping[str, EmbeddingTable] | None = None,
                   seed: int = 0, n_jobs: int = 1) -> TrainedPipeline:
    """Fit features on source train, pick a config on source val, and
    return the model trained on source train with that config."""
    feats = _featurizer(spec, lexicon, embeddings)
    if feats is None:
        fm_train, fm_val = _empty_matrix(source.train), _empty_matrix(source.val)
    else:
        feats.fit(source.train)
        fm_train, fm_val = feats.transform(source.train), feats.transform(source.val)
    if len(spec.grid) == 1:
        cfg = spec.grid[0]
        model = fit_model(fm_train.rows, fm_train.y, cfg, seed, n_jobs)
        scores = [macro_f1(fm_val.y, model.predict(fm_val.rows))] if len(fm_val.labels) else []
        return TrainedPipeline(spec, source.name, feats, model, cfg, scores, seed)
    result = grid_search(fm_train, fm_val, spec, seed, n_jobs)
    return TrainedPipeline(spec, source.name, feats, result.model, result.chosen, result.scores, seed)


def evaluate(trained: TrainedPipeline, target_name: str, test: CorpusSet) -> EvalReport:
    if trained.featurizer is None:
        X = np.zeros((len(test), 0))
    else:
        X = trained.featurizer.transform(test).rows
    pred = trained.model.predict(X)
    gold = [lab for lab in test.labels]
    pred_labels = [CLASSES[int(p)] for p in pred]
    table = confusion(gold, pred_labels, CLASSES)
    f1 = per_class_f1(gold, pred_labels, CLASSES)
    return EvalReport(
        source=trained.source,
        target=target_name,
        pipeline=trained.spec.name,
        macro_f1=macro_f1(gold, pred_labels, CLASSES) if len(test) else float("nan"),
        per_class_f1={c.value: v for c, v in f1.items()},
        confusion={g.value: {p.value: n for p, n in row.items()} for g, row in table.items()},
        chosen_config=config_dict(trained.chosen),
        grid_scores=list(trained.grid_scores),
        seeds={"experiment": trained.seed},
        n_test=len(test),
    )


def run_experiment(source: Splits, target: Splits, spec: PipelineSpec,
                   lexicon: Lexicon | None = None,
                   embeddings: Mapping[str, EmbeddingTable] | None = None,
                   seed: int = 0, n_jobs: int = 1) -> EvalReport:
    """Train on ``source`` (train/val) and score on ``target.test``."""
    trained = train_pipeline(source, spec, lexicon, embeddings, seed, n_jobs)
    return evaluate(trained, target.name, target.test)


@dataclass
class CrossResult:
    cells: list[EvalReport]
    pairs: list[tuple[str, str]]
    pipelines: list[str]
    averages: dict[str, float | None] = field(default_factory=dict)

    def cell(self, pipeline: str, source: str, target: str) -> EvalReport:
        for c in self.cells:
            if (c.pipeline, c.source, c.target) == (pipeline, source, target):
                return c
        raise KeyError((pipeline, source, target))


def transfer_average(cells: Sequence[EvalReport]) -> float | None:
    """Mean macro F1 over off-diagonal (source != target) cells."""
    vals = [c.macro_f1 for c in cells if c.source != c.target]
    return float(np.mean(vals)) if vals else None


def cross_matrix(datasets: Mapping[str, Splits], specs: Sequence[PipelineSpec],
                 pairs: Sequence[tuple[str, str]] | None = None,
                 lexicon: Lexicon | None = None,
                 embeddings: Mapping[str, EmbeddingTable] | None = None,
                 seed: int = 0, n_jobs: int = 1) -> CrossResult:
    """Evaluate every pipeline on every (source, target) pair.

    By default all ordered pairs are run, diagonal included. Each pipeline
    is trained once per source and reused across targets.
    """
    names = list(datasets)
    if pairs is None:
        pairs = [(s, t) for s in names for t in names]
    for s, t in pairs:
        if s not in datasets or t not in datasets:
            raise ExperimentError(f"unknown dataset in pair {s} -> {t}")
    cells: list[EvalReport] = []
    averages: dict[str, float | None] = {}
    for spec in specs:
        trained: dict[str, TrainedPipeline] = {}
        row = []
        for s, t in pairs:
            if s not in trained:
                log.info("training %s on %s", spec.name, s)
                trained[s] = train_pipeline(datasets[s], spec, lexicon, embeddings, seed, n_jobs)
            row.append(evaluate(trained[s], t, datasets[t].test))
        cells.extend(row)
        averages[spec.name] = transfer_average(row)
    return CrossResult(cells, [tuple(p) for p in pairs], [s.name for s in specs], averages)
