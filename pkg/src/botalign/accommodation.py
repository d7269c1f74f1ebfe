"""Conversation- and group-level linguistic accommodation.

For a responder ``r`` and word category ``c``, the replies are the turns
``i > 0`` spoken by ``r``. Within one conversation::

    baseline(c)    = P(c in reply)
    conditional(c) = P(c in reply | c in preceding turn)
    acc(c)         = conditional(c) - baseline(c)

A group score is the plain mean of ``acc(c)`` over the conversations
where it is defined.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import CorpusSet, Dialogue, Speaker
from .lexicon import Lexicon, categories_in, tokenize


class AccommodationError(ValueError):
    pass


@dataclass(frozen=True)
class CategoryScore:
    baseline: float | None
    conditional: float | None
    acc: float | None
    reply_count: int
    trigger_count: int


@dataclass(frozen=True)
class AccommodationProfile:
    responder: Speaker
    scores: dict[str, CategoryScore]

    def acc(self, category: str) -> float | None:
        return self.scores[category].acc

    def __getitem__(self, category: str) -> CategoryScore:
        return self.scores[category]


@dataclass(frozen=True)
class GroupScore:
    acc: float | None
    baseline: float | None
    n_contributing: int
    n_baseline: int


@dataclass(frozen=True)
class GroupProfile:
    responder: Speaker
    scores: dict[str, GroupScore]
    n_dialogues: int

    def __getitem__(self, category: str) -> GroupScore:
        return self.scores[category]


def presence(d: Dialogue, lex: Lexicon) -> list[set[str]]:
    """Category presence set for every utterance of ``d``."""
    return [categories_in(tokenize(u.text), lex) for u in d.utterances]


def conversation_accommodation(
    d: Dialogue,
    lex: Lexicon,
    responder: Speaker | str,
    categories: Sequence[str] | None = None,
    present: list[set[str]] | None = None,
) -> AccommodationProfile:
    """Accommodation of ``responder`` to the other party within one dialogue.

    ``present`` may carry precomputed :func:`presence` sets to avoid
    re-tokenizing when both perspectives are needed.
    """
    responder = Speaker(responder)
    if not d.is_alternating:
        raise AccommodationError(f"dialogue {d.id!r} is not normalized (speakers must alternate)")
    names = list(categories) if categories is not None else lex.names
    if present is None:
        present = presence(d, lex)
    replies = [i for i in range(1, len(d)) if d.utterances[i].speaker is responder]
    n_replies = len(replies)
    scores = {}
    for c in names:
        hits = triggers = both = 0
        for i in replies:
            in_reply = c in present[i]
            in_trigger = c in present[i - 1]
            hits += in_reply
            if in_trigger:
                triggers += 1
                both += in_reply
        baseline = hits / n_replies if n_replies else None
        conditional = both / triggers if triggers else None
        acc = conditional - baseline if conditional is not None else None
        scores[c] = CategoryScore(baseline, conditional, acc, n_replies, triggers)
    return AccommodationProfile(responder, scores)


def both_perspectives(
    d: Dialogue, lex: Lexicon, categories: Sequence[str] | None = None
) -> tuple[AccommodationProfile, AccommodationProfile]:
    """(human-responder, unknown-responder) profiles sharing one tokenization."""
    present = presence(d, lex)
    return (
        conversation_accommodation(d, lex, Speaker.HUMAN, categories, present),
        conversation_accommodation(d, lex, Speaker.UNKNOWN, categories, present),
    )


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def aggregate(profiles: Iterable[AccommodationProfile], responder: Speaker,
              categories: Sequence[str]) -> GroupProfile:
    accs: dict[str, list[float]] = {c: [] for c in categories}
    bases: dict[str, list[float]] = {c: [] for c in categories}
    n = 0
    for prof in profiles:
        n += 1
        for c in categories:
            s = prof.scores[c]
            if s.acc is not None:
                accs[c].append(s.acc)
            if s.baseline is not None:
                bases[c].append(s.baseline)
    return GroupProfile(
        responder,
        {c: GroupScore(_mean(accs[c]), _mean(bases[c]), len(accs[c]), len(bases[c]))
         for c in categories},
        n,
    )


def group_accommodation(
    corpus: CorpusSet,
    lex: Lexicon,
    responder: Speaker | str,
    categories: Sequence[str] | None = None,
) -> GroupProfile:
    """Mean conversation-level scores, skipping conversations where undefined."""
    responder = Speaker(responder)
    names = list(categories) if categories is not None else lex.names
    profiles = (conversation_accommodation(d, lex, responder, names) for d in corpus)
    return aggregate(profiles, responder, names)


REPORT_COLUMNS = ("perspective", "category", "group_acc", "group_baseline", "n_contributing")


def alignment_report(
    corpus: CorpusSet, lex: Lexicon, categories: Sequence[str] | None = None
) -> list[dict]:
    """Group accommodation rows for the human and unknown perspectives.

    Undefined group values are ``None``. An empty corpus yields no rows.
    """
    if len(corpus) == 0:
        return []
    names = list(categories) if categories is not None else lex.names
    pairs = [both_perspectives(d, lex, names) for d in corpus]
    rows = []
    for k, responder in enumerate((Speaker.HUMAN, Speaker.UNKNOWN)):
        group = aggregate((p[k] for p in pairs), responder, names)
        for c in names:
            s = group.scores[c]
            rows.append({
                "perspective": responder.value,
                "category": c,
                "group_acc": s.acc,
                "group_baseline": s.baseline,
                "n_contributing": s.n_contributing,
            })
    return rows


def report_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow(["" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else r[k])
                         for k in REPORT_COLUMNS])
    return buf.getvalue()


def write_report(rows: Sequence[dict], path: str | Path) -> None:
    Path(path).write_text(report_csv(rows), encoding="utf-8")
