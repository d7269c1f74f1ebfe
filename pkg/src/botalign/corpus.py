"""Dialogue data model, dataset adapters, normalization and splitting.

The canonical on-disk format is JSON Lines, one dialogue per line::

    {"id": "d1", "source": "dailydialog", "label": "human-human",
     "utterances": [{"speaker": "human", "text": "Hi !"},
                    {"speaker": "unknown", "text": "Hello ."}]}
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .lexicon import tokenize

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    """Malformed input data."""


class Speaker(str, Enum):
    HUMAN = "human"
    UNKNOWN = "unknown"

    @property
    def other(self) -> "Speaker":
        return Speaker.UNKNOWN if self is Speaker.HUMAN else Speaker.HUMAN


class Label(str, Enum):
    HUMAN_HUMAN = "human-human"
    HUMAN_BOT = "human-bot"


@dataclass(frozen=True)
class Utterance:
    speaker: Speaker
    text: str
    index: int


@dataclass(frozen=True)
class Dialogue:
    id: str
    source: str
    label: Label
    utterances: tuple[Utterance, ...]

    @classmethod
    def build(cls, id: str, source: str, label: Label | str,
              turns: Iterable[tuple[Speaker | str, str]]) -> "Dialogue":
        utts = tuple(Utterance(Speaker(s), t, i) for i, (s, t) in enumerate(turns))
        return cls(id, source, Label(label), utts)

    def __len__(self) -> int:
        return len(self.utterances)

    @property
    def is_alternating(self) -> bool:
        return all(a.speaker is not b.speaker
                   for a, b in zip(self.utterances, self.utterances[1:]))

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "label": self.label.value,
            "utterances": [{"speaker": u.speaker.value, "text": u.text}
                           for u in self.utterances],
        }


@dataclass(frozen=True)
class CorpusSet:
    name: str
    dialogues: tuple[Dialogue, ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for d in self.dialogues:
            if d.id in seen:
                raise CorpusError(f"duplicate dialogue id {d.id!r} in corpus {self.name!r}")
            seen.add(d.id)

    def __len__(self) -> int:
        return len(self.dialogues)

    def __iter__(self) -> Iterator[Dialogue]:
        return iter(self.dialogues)

    @property
    def labels(self) -> list[Label]:
        return [d.label for d in self.dialogues]

    def renamed(self, name: str) -> "CorpusSet":
        return CorpusSet(name, self.dialogues)


@dataclass(frozen=True)
class CorpusStats:
    n_dialogues: int
    n_utterances: int
    avg_utterances_per_dialogue: float
    avg_words_per_utterance: float
    label_counts: dict[str, int] = field(default_factory=dict)
    n_empty_utterances: int = 0
    n_short_dialogues: int = 0

    def as_dict(self) -> dict:
        return {
            "n_dialogues": self.n_dialogues,
            "n_utterances": self.n_utterances,
            "avg_utterances_per_dialogue": self.avg_utterances_per_dialogue,
            "avg_words_per_utterance": self.avg_words_per_utterance,
            "label_counts": dict(self.label_counts),
            "n_empty_utterances": self.n_empty_utterances,
            "n_short_dialogues": self.n_short_dialogues,
        }


# -- canonical format -------------------------------------------------------

def _parse_record(obj: object, where: str) -> Dialogue:
    if not isinstance(obj, dict):
        raise CorpusError(f"malformed record at {where}: expected an object")
    try:
        did, source, label, utts = obj["id"], obj["source"], obj["label"], obj["utterances"]
    except KeyError as exc:
        raise CorpusError(f"malformed record at {where}: missing field {exc.args[0]!r}") from None
    if not isinstance(did, str) or not isinstance(source, str) or not isinstance(utts, list):
        raise CorpusError(f"malformed record at {where}: wrong field types")
    try:
        label = Label(label)
    except ValueError:
        raise CorpusError(f"unknown label at {where}: {label!r}") from None
    turns = []
    for k, u in enumerate(utts):
        if not isinstance(u, dict) or not isinstance(u.get("text"), str):
            raise CorpusError(f"malformed utterance {k} at {where}")
        try:
            turns.append((Speaker(u.get("speaker")), u["text"]))
        except ValueError:
            raise CorpusError(f"unknown speaker at {where}: {u.get('speaker')!r}") from None
    return Dialogue.build(did, source, label, turns)


def load_canonical(path: str | Path, name: str | None = None) -> CorpusSet:
    """Read a canonical JSONL dialogue file, preserving record order."""
    path = Path(path)
    dialogues: list[Dialogue] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed record at line {lineno}: {exc.msg}") from None
            d = _parse_record(obj, f"line {lineno}")
            if d.id in seen:
                raise CorpusError(f"duplicate id at line {lineno}: {d.id!r}")
            seen.add(d.id)
            dialogues.append(d)
    return CorpusSet(name or path.stem, tuple(dialogues))


def dump_canonical(corpus: Iterable[Dialogue]) -> str:
    return "".join(
        json.dumps(d.to_record(), ensure_ascii=False, separators=(", ", ": ")) + "\n"
        for d in corpus
    )


def write_canonical(corpus: Iterable[Dialogue], path: str | Path) -> None:
    Path(path).write_text(dump_canonical(corpus), encoding="utf-8")


# -- adapters ---------------------------------------------------------------

ADAPTER_FORMATS = ("convai2_json", "dailydialog_text")


def _read_dailydialog(path: Path, label: Label, source: str) -> list[Dialogue]:
    out = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if "__eou__" not in line:
                raise CorpusError(f"{path}:{lineno}: no __eou__ turn separators")
            parts = line.split("__eou__")
            if not parts[-1].strip():
                parts = parts[:-1]
            turns = [(Speaker.HUMAN if k % 2 == 0 else Speaker.UNKNOWN, p.strip())
                     for k, p in enumerate(parts)]
            out.append(Dialogue.build(f"{source}-{lineno}", source, label, turns))
    return out


def _iter_convai_records(path: Path) -> Iterator[tuple[str, object]]:
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        return
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if data is not None:
        if isinstance(data, dict):
            data = data.get("dialogs", data.get("data", [data]))
        if not isinstance(data, list):
            raise CorpusError(f"{path}: expected a list of dialogue records")
        for k, rec in enumerate(data):
            yield f"{path}: record {k}", rec
        return
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            yield f"{path}:{lineno}", json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None


def _read_convai2(path: Path, label: Label, source: str) -> list[Dialogue]:
    out = []
    for k, (where, rec) in enumerate(_iter_convai_records(path)):
        if not isinstance(rec, dict) or not isinstance(rec.get("dialog"), list):
            raise CorpusError(f"{where}: record has no 'dialog' list")
        turns = rec["dialog"]
        senders: list[str] = []
        human = None
        for t in turns:
            if not isinstance(t, dict) or "text" not in t:
                raise CorpusError(f"{where}: turn without text")
            s = str(t.get("sender", ""))
            if s not in senders:
                senders.append(s)
            if human is None and str(t.get("sender_class", "human")).lower() == "human":
                human = s
        if len(senders) > 2:
            raise CorpusError(f"{where}: more than two participants")
        if human is None:
            human = senders[0] if senders else ""
        did = str(rec.get("dialog_id", rec.get("id", f"{source}-{k}")))
        out.append(Dialogue.build(
            did, source, label,
            [(Speaker.HUMAN if str(t.get("sender", "")) == human else Speaker.UNKNOWN,
              str(t["text"])) for t in turns],
        ))
    return out


def import_adapter(fmt: str, path: str | Path, label: Label | str, source_tag: str) -> CorpusSet:
    """Convert a raw dataset file to canonical dialogues.

    ``convai2_json`` reads ConvAI2 evaluation-phase logs (a JSON list, or
    JSON lines, of ``{"dialog_id", "dialog": [{"sender", "sender_class",
    "text"}]}``). The first participant whose ``sender_class`` is human is
    the known human; the other participant is stored as unknown even when
    the source is human-human.

    ``dailydialog_text`` reads the DailyDialog release, one dialogue per
    line with turns terminated by ``__eou__``; turns alternate starting
    with the known human.
    """
    path = Path(path)
    label = Label(label)
    if fmt == "convai2_json":
        dialogues = _read_convai2(path, label, source_tag)
    elif fmt == "dailydialog_text":
        dialogues = _read_dailydialog(path, label, source_tag)
    else:
        raise CorpusError(f"unknown import format {fmt!r}; choose from {', '.join(ADAPTER_FORMATS)}")
    return CorpusSet(source_tag, tuple(dialogues))


# -- normalization, splitting, statistics -----------------------------------

def normalize(d: Dialogue) -> Dialogue:
    """Merge consecutive same-speaker turns so speakers alternate."""
    merged: list[tuple[Speaker, str]] = []
    for u in d.utterances:
        if merged and merged[-1][0] is u.speaker:
            merged[-1] = (u.speaker, merged[-1][1] + " " + u.text)
        else:
            merged.append((u.speaker, u.text))
    if len(merged) == len(d.utterances):
        return d
    return Dialogue.build(d.id, d.source, d.label, merged)


def prepare(corpus: CorpusSet) -> tuple[CorpusSet, int]:
    """Normalize every dialogue and drop those left with fewer than 2 turns.

    Returns the cleaned corpus and the number of dropped dialogues.
    """
    kept = []
    dropped = 0
    for d in corpus:
        d = normalize(d)
        if len(d) < 2:
            dropped += 1
            continue
        kept.append(d)
    if dropped:
        log.info("%s: dropped %d dialogues with fewer than 2 turns", corpus.name, dropped)
    return CorpusSet(corpus.name, tuple(kept)), dropped


def split_sizes(n: int) -> tuple[int, int, int]:
    a, b = math.floor(0.7 * n), math.floor(0.8 * n)
    return a, b - a, n - b


def split(corpus: CorpusSet, seed: int) -> tuple[CorpusSet, CorpusSet, CorpusSet]:
    """Seeded 70/10/20 train/validation/test split."""
    n = len(corpus)
    order = np.random.default_rng(seed).permutation(n)
    n_train, n_val, _ = split_sizes(n)
    a, b = n_train, n_train + n_val
    picked = [corpus.dialogues[i] for i in order]
    return (
        CorpusSet(f"{corpus.name}/train", tuple(picked[:a])),
        CorpusSet(f"{corpus.name}/val", tuple(picked[a:b])),
        CorpusSet(f"{corpus.name}/test", tuple(picked[b:])),
    )


def concat(name: str, parts: Sequence[CorpusSet]) -> CorpusSet:
    return CorpusSet(name, tuple(d for p in parts for d in p))


def stats(corpus: CorpusSet) -> CorpusStats:
    n_d = len(corpus)
    n_u = sum(len(d) for d in corpus)
    words = sum(len(tokenize(u.text)) for d in corpus for u in d.utterances)
    labels: dict[str, int] = {}
    for d in corpus:
        labels[d.label.value] = labels.get(d.label.value, 0) + 1
    return CorpusStats(
        n_dialogues=n_d,
        n_utterances=n_u,
        avg_utterances_per_dialogue=n_u / n_d if n_d else 0.0,
        avg_words_per_utterance=words / n_u if n_u else 0.0,
        label_counts=labels,
        n_empty_utterances=sum(1 for d in corpus for u in d.utterances if not u.text.strip()),
        n_short_dialogues=sum(1 for d in corpus if len(normalize(d)) < 2),
    )
