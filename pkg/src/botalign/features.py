"""Per-dialogue feature vectors: TF-IDF unigrams, LIWC means, accommodation
scores and precomputed embeddings, for the three speaker variants."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .accommodation import both_perspectives, conversation_accommodation
from .corpus import CorpusSet, Dialogue, Label, Speaker
from .lexicon import WORKING_CATEGORIES, Lexicon, category_rates, tokenize

log = logging.getLogger(__name__)


class FeatureError(ValueError):
    pass


class Variant(str, Enum):
    HUMAN = "human"
    UNKNOWN = "unknown"
    BOTH = "both"


class FeatureFamily(str, Enum):
    BAG_OF_WORDS = "bag_of_words"
    EMBEDDING = "embedding"
    LIWC = "liwc"
    ACCOMMODATION = "accommodation"
    LIWC_ACCOMMODATION = "liwc_accommodation"

    @property
    def is_content(self) -> bool:
        return self in (FeatureFamily.BAG_OF_WORDS, FeatureFamily.EMBEDDING)


def _selected(d: Dialogue, v: Variant):
    v = Variant(v)
    if v is Variant.BOTH:
        return list(d.utterances)
    want = Speaker.HUMAN if v is Variant.HUMAN else Speaker.UNKNOWN
    return [u for u in d.utterances if u.speaker is want]


def select_text(d: Dialogue, v: Variant | str) -> str:
    return " ".join(u.text for u in _selected(d, v))


# -- TF-IDF -----------------------------------------------------------------

@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    doc_frequency: dict[str, int]
    n_docs: int
    variant: Variant

    @property
    def idf(self) -> np.ndarray:
        out = np.empty(len(self.vocabulary))
        for w, j in self.vocabulary.items():
            out[j] = math.log((1 + self.n_docs) / (1 + self.doc_frequency[w])) + 1.0
        return out

    @property
    def feature_names(self) -> list[str]:
        names = [""] * len(self.vocabulary)
        for w, j in self.vocabulary.items():
            names[j] = w
        return names

    def to_dict(self) -> dict:
        return {"variant": self.variant.value, "n_docs": self.n_docs,
                "vocabulary": self.feature_names,
                "doc_frequency": [self.doc_frequency[w] for w in self.feature_names]}

    @classmethod
    def from_dict(cls, obj: Mapping) -> "TfidfModel":
        words = list(obj["vocabulary"])
        return cls({w: j for j, w in enumerate(words)},
                   dict(zip(words, obj["doc_frequency"])), int(obj["n_docs"]), Variant(obj["variant"]))


def tfidf_fit(train: Iterable[Dialogue], v: Variant | str) -> TfidfModel:
    """Vocabulary and document frequencies over the selected training text.

    Columns are ordered alphabetically so the model does not depend on
    dialogue order.
    """
    v = Variant(v)
    df: Counter[str] = Counter()
    n_docs = 0
    for d in train:
        n_docs += 1
        df.update(set(tokenize(select_text(d, v))))
    if not df:
        raise FeatureError("no tokens in the selected training text; cannot fit TF-IDF")
    vocab = {w: j for j, w in enumerate(sorted(df))}
    return TfidfModel(vocab, dict(df), n_docs, v)


def tfidf_transform(m: TfidfModel, d: Dialogue, v: Variant | str | None = None,
                    idf: np.ndarray | None = None) -> np.ndarray:
    """Smoothed-idf weighted counts, L2-normalized unless all zero."""
    v = m.variant if v is None else Variant(v)
    if idf is None:
        idf = m.idf
    vec = np.zeros(len(m.vocabulary))
    for w, k in Counter(tokenize(select_text(d, v))).items():
        j = m.vocabulary.get(w)
        if j is not None:
            vec[j] = k * idf[j]
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


# -- stylistic features -----------------------------------------------------

def liwc_features(d: Dialogue, lex: Lexicon, v: Variant | str,
                  categories: Sequence[str] = WORKING_CATEGORIES) -> np.ndarray:
    """Mean per-utterance category rate over the selected utterances."""
    utts = _selected(d, v)
    out = np.zeros(len(categories))
    if not utts:
        return out
    for u in utts:
        rates = category_rates(tokenize(u.text), lex)
        out += [rates[c] for c in categories]
    return out / len(utts)


def accommodation_features(d: Dialogue, lex: Lexicon, v: Variant | str,
                           categories: Sequence[str] = WORKING_CATEGORIES) -> np.ndarray:
    """acc(c) per category; missing scores become 0.0.

    HUMAN measures the human as responder, UNKNOWN the unknown party, and
    BOTH concatenates human then unknown.
    """
    v = Variant(v)
    if v is Variant.BOTH:
        profiles = both_perspectives(d, lex, categories)
    else:
        who = Speaker.HUMAN if v is Variant.HUMAN else Speaker.UNKNOWN
        profiles = (conversation_accommodation(d, lex, who, categories),)
    vals = [p.scores[c].acc for p in profiles for c in categories]
    return np.array([0.0 if a is None else a for a in vals])


def accommodation_names(v: Variant | str, categories: Sequence[str] = WORKING_CATEGORIES) -> list[str]:
    v = Variant(v)
    sides = ["human", "unknown"] if v is Variant.BOTH else [v.value]
    if len(sides) == 1:
        return list(categories)
    return [f"{s}.{c}" for s in sides for c in categories]


def combine(parts: Sequence[tuple[Sequence[str], np.ndarray]], prefixes: Sequence[str]):
    """Concatenate named vectors, prefixing each block's names.

    Returns ``(names, vector)``.
    """
    if not parts:
        raise FeatureError("combine needs at least one feature block")
    if len(parts) != len(prefixes):
        raise FeatureError("one prefix is required per feature block")
    names: list[str] = []
    for (block_names, vec), prefix in zip(parts, prefixes):
        if len(block_names) != len(vec):
            raise FeatureError(f"block {prefix!r}: {len(block_names)} names for {len(vec)} values")
        names.extend(prefix + n for n in block_names)
    if len(set(names)) != len(names):
        dup = next(n for n, k in Counter(names).items() if k > 1)
        raise FeatureError(f"duplicate feature name {dup!r}")
    return names, np.concatenate([np.asarray(v, dtype=float) for _, v in parts])


# -- embeddings -------------------------------------------------------------

@dataclass
class EmbeddingTable:
    vectors: dict[str, np.ndarray]
    dim: int
    skipped: int = 0


def load_embeddings(path: str | Path, v: Variant | str,
                    corpus_ids: Iterable[str] | None = None) -> EmbeddingTable:
    """Read an embedding sidecar (JSONL ``{dialogue_id, variant, vector}``).

    Records for other variants are ignored; records whose id is not in
    ``corpus_ids`` are skipped and counted.
    """
    v = Variant(v)
    known = set(corpus_ids) if corpus_ids is not None else None
    vectors: dict[str, np.ndarray] = {}
    dim = None
    skipped = 0
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                did, var, vec = str(rec["dialogue_id"]), Variant(rec["variant"]), rec["vector"]
                arr = np.asarray(vec, dtype=float)
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                raise FeatureError(f"{path}:{lineno}: malformed embedding record ({exc})") from None
            if var is not v:
                continue
            if arr.ndim != 1:
                raise FeatureError(f"{path}:{lineno}: vector must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise FeatureError(f"{path}:{lineno}: non-finite value in vector")
            if dim is None:
                dim = arr.shape[0]
            elif arr.shape[0] != dim:
                raise FeatureError(f"{path}:{lineno}: dimension {arr.shape[0]} != {dim}")
            if known is not None and did not in known:
                skipped += 1
                continue
            vectors[did] = arr
    if skipped:
        log.warning("%s: skipped %d embedding records for dialogues not in the corpus", path, skipped)
    return EmbeddingTable(vectors, dim or 0, skipped)


# -- feature matrices -------------------------------------------------------

@dataclass
class FeatureMatrix:
    """Rows are dense, or CSR sparse for bag-of-words."""

    feature_names: list[str]
    rows: np.ndarray | sp.csr_matrix
    labels: list[Label]
    dialogue_ids: list[str]

    def __post_init__(self):
        shape = (len(self.dialogue_ids), len(self.feature_names))
        if sp.issparse(self.rows):
            self.rows = sp.csr_matrix(self.rows, dtype=float)
            values = self.rows.data
        else:
            self.rows = np.asarray(self.rows, dtype=float).reshape(shape)
            values = self.rows
        if self.rows.shape != shape:
            raise FeatureError(f"feature matrix shape {self.rows.shape} != {shape}")
        if len(self.labels) != len(self.dialogue_ids):
            raise FeatureError("labels and dialogue ids differ in length")
        if not np.all(np.isfinite(values)):
            raise FeatureError("feature matrix contains non-finite values")

    def dense(self) -> np.ndarray:
        return self.rows.toarray() if sp.issparse(self.rows) else self.rows

    @property
    def y(self) -> np.ndarray:
        """1 for human-bot, 0 for human-human."""
        return np.array([lab is Label.HUMAN_BOT for lab in self.labels], dtype=int)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "label", *self.feature_names])
        for did, lab, row in zip(self.dialogue_ids, self.labels, self.dense()):
            w.writerow([did, lab.value, *(repr(float(x)) for x in row)])
        return buf.getvalue()


@dataclass
class Featurizer:
    """Feature extractor for one family/variant, fitted on training data only."""

    family: FeatureFamily
    variant: Variant
    lexicon: Lexicon | None = None
    embeddings: EmbeddingTable | None = None
    categories: tuple[str, ...] = WORKING_CATEGORIES
    tfidf: TfidfModel | None = None
    _idf: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.family = FeatureFamily(self.family)
        self.variant = Variant(self.variant)
        if self.family in (FeatureFamily.LIWC, FeatureFamily.ACCOMMODATION,
                           FeatureFamily.LIWC_ACCOMMODATION):
            if self.lexicon is None:
                raise FeatureError(f"{self.family.value} features need a lexicon")
            self.lexicon.require(self.categories)
        if self.family is FeatureFamily.EMBEDDING and self.embeddings is None:
            raise FeatureError("embedding features need an embedding sidecar")

    def fit(self, train: CorpusSet) -> "Featurizer":
        if self.family is FeatureFamily.BAG_OF_WORDS:
            if len(train) == 0:
                raise FeatureError("cannot fit TF-IDF on an empty corpus")
            self.tfidf = tfidf_fit(train, self.variant)
            self._idf = self.tfidf.idf
        return self

    @property
    def feature_names(self) -> list[str]:
        f = self.family
        if f is FeatureFamily.BAG_OF_WORDS:
            if self.tfidf is None:
                raise FeatureError("featurizer is not fitted")
            return self.tfidf.feature_names
        if f is FeatureFamily.EMBEDDING:
            return [f"emb{j}" for j in range(self.embeddings.dim)]
        if f is FeatureFamily.LIWC:
            return list(self.categories)
        if f is FeatureFamily.ACCOMMODATION:
            return accommodation_names(self.variant, self.categories)
        return (["liwc." + c for c in self.categories]
                + ["acc." + n for n in accommodation_names(self.variant, self.categories)])

    def vector(self, d: Dialogue) -> np.ndarray:
        f = self.family
        if f is FeatureFamily.BAG_OF_WORDS:
            if self.tfidf is None:
                raise FeatureError("featurizer is not fitted")
            return tfidf_transform(self.tfidf, d, self.variant, self._idf)
        if f is FeatureFamily.EMBEDDING:
            vec = self.embeddings.vectors.get(d.id)
            if vec is None:
                raise FeatureError(f"no embedding for dialogue {d.id!r} ({self.variant.value})")
            return vec
        if f is FeatureFamily.LIWC:
            return liwc_features(d, self.lexicon, self.variant, self.categories)
        if f is FeatureFamily.ACCOMMODATION:
            return accommodation_features(d, self.lexicon, self.variant, self.categories)
        _, vec = combine(
            [(list(self.categories), liwc_features(d, self.lexicon, self.variant, self.categories)),
             (accommodation_names(self.variant, self.categories),
              accommodation_features(d, self.lexicon, self.variant, self.categories))],
            ["liwc.", "acc."],
        )
        return vec

    def transform(self, corpus: CorpusSet) -> FeatureMatrix:
        names = self.feature_names
        if self.family is FeatureFamily.BAG_OF_WORDS:
            rows = sp.vstack([sp.csr_matrix(self.vector(d)) for d in corpus], format="csr") \
                if len(corpus) else sp.csr_matrix((0, len(names)))
            return FeatureMatrix(names, rows, [d.label for d in corpus], [d.id for d in corpus])
        rows = np.zeros((len(corpus), len(names)))
        for k, d in enumerate(corpus):
            rows[k] = self.vector(d)
        return FeatureMatrix(names, rows, [d.label for d in corpus], [d.id for d in corpus])

    def state(self) -> dict:
        return {"family": self.family.value, "variant": self.variant.value,
                "categories": list(self.categories),
                "tfidf": self.tfidf.to_dict() if self.tfidf is not None else None}
