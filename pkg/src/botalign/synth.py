"""Synthetic dialogues with planted, analytically known accommodation.

The non-responder includes each category word with probability ``q``.
The responder includes it with probability ``p1`` when the preceding turn
contained it and ``p0`` otherwise, so the expected responder
accommodation is ``(1 - q) * (p1 - p0)`` and its marginal usage rate is
``q * p1 + (1 - q) * p0``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .corpus import CorpusSet, Dialogue, Label, Speaker
from .lexicon import WORKING_CATEGORIES, Lexicon


class SynthError(ValueError):
    pass


def default_fillers(n: int = 60) -> tuple[str, ...]:
    """Pronounceable nonsense words that no real dictionary should contain."""
    words = ("".join(p) + "x" for p in itertools.product("zqvk", "aou", "zvk"))
    return tuple(itertools.islice(words, n))


@dataclass(frozen=True)
class CategoryPlan:
    word: str
    q: float
    p1: float
    p0: float

    @property
    def expected_acc(self) -> float:
        return (1 - self.q) * (self.p1 - self.p0)

    @property
    def expected_rate(self) -> float:
        return self.q * self.p1 + (1 - self.q) * self.p0


@dataclass(frozen=True)
class SynthConfig:
    n_dialogues: int
    n_utterances: int
    categories: Mapping[str, CategoryPlan]
    label: Label = Label.HUMAN_HUMAN
    responder: Speaker = Speaker.HUMAN
    filler_vocab: tuple[str, ...] = field(default_factory=default_fillers)
    fillers_per_utterance: tuple[int, int] = (2, 6)
    seed: int = 0
    source: str = "synth"

    def __post_init__(self):
        object.__setattr__(self, "label", Label(self.label))
        object.__setattr__(self, "responder", Speaker(self.responder))
        object.__setattr__(self, "filler_vocab", tuple(self.filler_vocab))
        object.__setattr__(self, "fillers_per_utterance", tuple(self.fillers_per_utterance))
        if self.n_dialogues < 0:
            raise SynthError("n_dialogues must be non-negative")
        if self.n_utterances < 4 or self.n_utterances % 2:
            raise SynthError("n_utterances must be even and at least 4")
        lo, hi = self.fillers_per_utterance
        if not 1 <= lo <= hi:
            raise SynthError("fillers_per_utterance must satisfy 1 <= min <= max")
        if not self.filler_vocab:
            raise SynthError("filler vocabulary is empty")
        words = set()
        for name, plan in self.categories.items():
            for r in (plan.q, plan.p1, plan.p0):
                if not 0.0 <= r <= 1.0:
                    raise SynthError(f"category {name!r}: rates must lie in [0, 1]")
            if plan.word in words:
                raise SynthError(f"category word {plan.word!r} is used twice")
            words.add(plan.word)
        clash = words & set(self.filler_vocab)
        if clash:
            raise SynthError(f"filler vocabulary overlaps category words: {sorted(clash)}")

    def to_dict(self) -> dict:
        return {
            "n_dialogues": self.n_dialogues, "n_utterances": self.n_utterances,
            "categories": {c: {"word": p.word, "q": p.q, "p1": p.p1, "p0": p.p0}
                           for c, p in self.categories.items()},
            "label": self.label.value, "responder": self.responder.value,
            "filler_vocab": list(self.filler_vocab),
            "fillers_per_utterance": list(self.fillers_per_utterance),
            "seed": self.seed, "source": self.source,
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "SynthConfig":
        obj = dict(obj)
        obj["categories"] = {c: CategoryPlan(**p) for c, p in obj["categories"].items()}
        if "filler_vocab" in obj:
            obj["filler_vocab"] = tuple(obj["filler_vocab"])
        if "fillers_per_utterance" in obj:
            obj["fillers_per_utterance"] = tuple(obj["fillers_per_utterance"])
        return cls(**obj)


_LABEL_CODE = {Label.HUMAN_HUMAN: 0, Label.HUMAN_BOT: 1}


def generate_dialogue(cfg: SynthConfig, index: int, dialogue_id: str | None = None) -> Dialogue:
    rng = np.random.default_rng([cfg.seed, _LABEL_CODE[cfg.label], index])
    plans = list(cfg.categories.values())
    lo, hi = cfg.fillers_per_utterance
    speaker = cfg.responder.other
    prev: np.ndarray | None = None
    turns = []
    for _ in range(cfg.n_utterances):
        u = rng.random(len(plans))
        if speaker is cfg.responder:
            probs = np.array([p.p1 if prev[k] else p.p0 for k, p in enumerate(plans)])
        else:
            probs = np.array([p.q for p in plans])
        present = u < probs
        tokens = [p.word for p, on in zip(plans, present) if on]
        n_fill = int(rng.integers(lo, hi + 1))
        tokens += [cfg.filler_vocab[j] for j in rng.integers(0, len(cfg.filler_vocab), n_fill)]
        order = rng.permutation(len(tokens))
        turns.append((speaker, " ".join(tokens[j] for j in order)))
        prev = present
        speaker = speaker.other
    did = dialogue_id or f"{cfg.source}-{cfg.label.value}-{index}"
    return Dialogue.build(did, cfg.source, cfg.label, turns)


def generate(cfg: SynthConfig) -> CorpusSet:
    """Deterministic corpus of alternating dialogues opened by the non-responder."""
    return CorpusSet(cfg.source, tuple(generate_dialogue(cfg, i) for i in range(cfg.n_dialogues)))


def make_detection_benchmark(cfg_hh: SynthConfig, cfg_hb: SynthConfig,
                             name: str = "synth-benchmark") -> CorpusSet:
    """Human-human plus human-bot dialogues that differ only in the
    responder's alignment parameters (``p1``, ``p0``)."""
    if set(cfg_hh.filler_vocab) != set(cfg_hb.filler_vocab):
        raise SynthError("benchmark configs must share one filler vocabulary")
    if set(cfg_hh.categories) != set(cfg_hb.categories):
        raise SynthError("benchmark configs must plant the same categories")
    for c, a in cfg_hh.categories.items():
        b = cfg_hb.categories[c]
        if a.word != b.word or a.q != b.q:
            raise SynthError(f"category {c!r}: word and trigger rate q must match across labels")
    if cfg_hh.responder is not cfg_hb.responder or cfg_hh.n_utterances != cfg_hb.n_utterances:
        raise SynthError("benchmark configs must share responder and dialogue length")
    hh = replace(cfg_hh, label=Label.HUMAN_HUMAN, source=name)
    hb = replace(cfg_hb, label=Label.HUMAN_BOT, source=name)
    dialogues = [generate_dialogue(hh, i, f"hh-{i}") for i in range(hh.n_dialogues)]
    dialogues += [generate_dialogue(hb, i, f"hb-{i}") for i in range(hb.n_dialogues)]
    return CorpusSet(name, tuple(dialogues))


def category_words(lex: Lexicon, categories: Sequence[str] = WORKING_CATEGORIES) -> dict[str, str]:
    """For each category, the exact-match word with the fewest category
    memberships (alphabetical among equals).

    Nested categories (``i`` inside ``pronoun``) rule out fully unique words.
    """
    out = {}
    for c in categories:
        words = sorted(lex.get(c).exact, key=lambda w: (len(lex.token_categories(w)), w))
        if not words:
            raise SynthError(f"lexicon has no exact word for category {c!r}")
        out[c] = words[0]
    if len(set(out.values())) != len(out):
        raise SynthError("categories do not have distinct representative words")
    return out


def lexicon_fillers(lex: Lexicon, n: int = 60) -> tuple[str, ...]:
    fillers = tuple(w for w in default_fillers(10 * n) if not lex.token_categories(w))[:n]
    if not fillers:
        raise SynthError("no filler word escapes the lexicon")
    return fillers


def benchmark_configs(
    lex: Lexicon,
    n_per_class: int = 500,
    n_utterances: int = 20,
    q: float = 0.5,
    human_human: tuple[float, float] = (0.8, 0.2),
    human_bot: tuple[float, float] = (0.5, 0.5),
    categories: Sequence[str] = WORKING_CATEGORIES,
    seed: int = 0,
) -> tuple[SynthConfig, SynthConfig]:
    """Topic-matched configs: same words, fillers and ``q`` for both labels;
    the known human's ``(p1, p0)`` differs by label."""
    words = category_words(lex, categories)
    fillers = lexicon_fillers(lex)

    def cfg(label, rates):
        plans = {c: CategoryPlan(words[c], q, rates[0], rates[1]) for c in categories}
        return SynthConfig(n_per_class, n_utterances, plans, label, Speaker.HUMAN, fillers, seed=seed)

    return cfg(Label.HUMAN_HUMAN, human_human), cfg(Label.HUMAN_BOT, human_bot)
