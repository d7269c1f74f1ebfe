"""Experiment configuration files (YAML or JSON).

Example::

    seed: 13
    lexicon: null                   # path to a .dic; null = bundled fallback
    sources:
      personachat: data/personachat.jsonl
      tolokers: data/tolokers.jsonl
    groups:                         # optional; default = one group per source
      P: [personachat, tolokers]
    embeddings:                     # optional sidecars, keyed by variant
      human: data/bert_human.jsonl
    pairs: [[P, C], [C, P]]         # optional, for cross runs
    pipelines:
      - {name: Human Accommodation, features: accommodation, variant: human,
         model: forest, grid: default, n_trees: 1000}
      - {name: Most Frequent, model: baseline, baseline: most_frequent}

``pipelines: standard`` expands to the three baselines plus every content and
stylistic pipeline per variant, each with its full grid.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .corpus import CorpusSet, concat, load_canonical, prepare, split
from .evaluation import ModelFamily, PipelineSpec, Splits
from .features import EmbeddingTable, FeatureFamily, Variant, load_embeddings
from .models import BaselineKind, ForestConfig, LogRegConfig
from .models import forest as forest_mod
from .models import logreg as logreg_mod


class ConfigError(ValueError):
    pass


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def read_config(path: str | Path) -> dict:
    try:
        obj = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: cannot parse config ({exc})") from None
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return obj


_VARIANT_TITLES = {Variant.HUMAN: "Human", Variant.UNKNOWN: "Unknown", Variant.BOTH: "Human & Unknown"}
_FAMILY_TITLES = {
    FeatureFamily.BAG_OF_WORDS: "Bag-of-Words", FeatureFamily.EMBEDDING: "BERT",
    FeatureFamily.LIWC: "LIWC", FeatureFamily.ACCOMMODATION: "Accommodation",
    FeatureFamily.LIWC_ACCOMMODATION: "LIWC + Accommodation",
}


def standard_pipelines(n_trees: int = 1000, grid: str = "full", embeddings: bool = False) -> list[dict]:
    rows: list[dict] = [
        {"name": "Most Frequent", "model": "baseline", "baseline": "most_frequent"},
        {"name": "Most Infrequent", "model": "baseline", "baseline": "most_infrequent"},
        {"name": "Stratified (random)", "model": "baseline", "baseline": "stratified"},
    ]
    content = [FeatureFamily.BAG_OF_WORDS] + ([FeatureFamily.EMBEDDING] if embeddings else [])
    for v in Variant:
        for f in content:
            rows.append({"name": f"{_VARIANT_TITLES[v]} {_FAMILY_TITLES[f]}", "features": f.value,
                         "variant": v.value, "model": "logreg", "grid": grid})
    for v in Variant:
        for f in (FeatureFamily.LIWC, FeatureFamily.ACCOMMODATION, FeatureFamily.LIWC_ACCOMMODATION):
            rows.append({"name": f"{_VARIANT_TITLES[v]} {_FAMILY_TITLES[f]}", "features": f.value,
                         "variant": v.value, "model": "forest", "grid": grid, "n_trees": n_trees})
    return rows


def _grid(entry: Mapping[str, Any], model: ModelFamily, seed: int) -> list:
    grid = entry.get("grid", "default")
    if model is ModelFamily.BASELINE:
        if "baseline" not in entry:
            raise ConfigError(f"pipeline {entry.get('name')!r}: baseline kind missing")
        return [BaselineKind(entry["baseline"])]
    if model is ModelFamily.LOGREG:
        if grid == "full":
            return logreg_mod.full_grid()
        if grid == "default":
            return [LogRegConfig()]
        return [LogRegConfig(**g) for g in grid]
    n_trees = int(entry.get("n_trees", 1000))
    if grid == "full":
        return forest_mod.full_grid(n_trees, seed)
    if grid == "default":
        return [ForestConfig(n_trees=n_trees, seed=seed)]
    return [ForestConfig(**{"n_trees": n_trees, "seed": seed, **g}) for g in grid]


def build_specs(entries: Any, seed: int = 0, n_trees: int | None = None) -> list[PipelineSpec]:
    if entries == "standard":
        entries = standard_pipelines()
    if not isinstance(entries, list) or not entries:
        raise ConfigError("pipelines must be a non-empty list or 'standard'")
    specs = []
    for e in entries:
        try:
            model = ModelFamily(e["model"])
            if n_trees is not None and model is ModelFamily.FOREST:
                e = {**e, "n_trees": n_trees}
            specs.append(PipelineSpec(
                name=e.get("name") or f"{e.get('variant', 'human')} {e.get('features', e['model'])}",
                family=FeatureFamily(e["features"]) if e.get("features") else None,
                variant=Variant(e.get("variant", "human")),
                model=model,
                grid=tuple(_grid(e, model, seed)),
                allow_mismatch=bool(e.get("allow_mismatch", False)),
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"pipeline {e!r}: {exc}") from None
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ConfigError("pipeline names must be unique")
    return specs


@dataclass
class Experiment:
    seed: int
    lexicon_path: Path | None
    sources: dict[str, Path]
    groups: dict[str, list[str]]
    specs: list[PipelineSpec]
    pairs: list[tuple[str, str]] | None
    embedding_paths: dict[str, Path] = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def input_files(self) -> dict[str, str]:
        files = dict(self.sources)
        if self.lexicon_path:
            files["lexicon"] = self.lexicon_path
        for v, p in self.embedding_paths.items():
            files[f"embeddings.{v}"] = p
        return {k: str(v) for k, v in files.items()}


def load_experiment(path: str | Path, n_trees: int | None = None,
                    seed: int | None = None) -> Experiment:
    """Parse an experiment config; relative paths resolve against its folder.

    ``n_trees`` and ``seed`` override the file's values.
    """
    path = Path(path)
    raw = read_config(path)
    base = path.parent

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    seed = int(raw.get("seed", 0)) if seed is None else seed
    sources = raw.get("sources")
    if not isinstance(sources, dict) or not sources:
        raise ConfigError("config needs a non-empty 'sources' mapping")
    src = {name: resolve(v["path"] if isinstance(v, dict) else v) for name, v in sources.items()}
    groups = raw.get("groups") or {name: [name] for name in src}
    for g, members in groups.items():
        for m in members:
            if m not in src:
                raise ConfigError(f"group {g!r} names unknown source {m!r}")
    pairs = raw.get("pairs")
    if pairs is not None:
        pairs = [tuple(p) for p in pairs]
        for s, t in pairs:
            if s not in groups or t not in groups:
                raise ConfigError(f"pair {s} -> {t} names an unknown group")
    lex = raw.get("lexicon")
    return Experiment(
        seed=seed,
        lexicon_path=resolve(lex) if lex else None,
        sources=src,
        groups={g: list(m) for g, m in groups.items()},
        specs=build_specs(raw.get("pipelines", "standard"), seed, n_trees),
        pairs=pairs,
        embedding_paths={v: resolve(p) for v, p in (raw.get("embeddings") or {}).items()},
        raw=raw,
    )


def build_datasets(exp: Experiment) -> dict[str, Splits]:
    """Split each source once, then union the splits into groups, so a source
    shared by two groups contributes identical train/val/test members."""
    per_source: dict[str, tuple[CorpusSet, CorpusSet, CorpusSet]] = {}
    for name, p in exp.sources.items():
        corpus, _ = prepare(load_canonical(p, name))
        per_source[name] = split(corpus, exp.seed)
    out = {}
    for g, members in exp.groups.items():
        parts = [per_source[m] for m in members]
        out[g] = Splits(g, concat(f"{g}/train", [p[0] for p in parts]),
                        concat(f"{g}/val", [p[1] for p in parts]),
                        concat(f"{g}/test", [p[2] for p in parts]))
    return out


def load_experiment_embeddings(exp: Experiment, datasets: Mapping[str, Splits]) -> dict[str, EmbeddingTable]:
    ids = {d.id for s in datasets.values() for part in (s.train, s.val, s.test) for d in part}
    return {v: load_embeddings(p, v, ids) for v, p in exp.embedding_paths.items()}
