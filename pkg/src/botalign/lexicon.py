"""Tokenization and LIWC-style word-category lexicons.

A lexicon maps category names to patterns. A pattern is either an exact
word (``happy``) or a prefix stem written with a trailing wildcard in the
``.dic`` file (``happi*``). Matching works on lowercase tokens produced by
:func:`tokenize`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

WORKING_CATEGORIES: tuple[str, ...] = (
    "i", "you", "we", "they", "social", "cogproc", "posemo", "negemo", "article",
    "prep", "certain", "conj", "discrep", "negate", "pronoun", "quant", "tentat",
)

FALLBACK_DIC = "fallback17.dic"

# runs of alphanumerics, optionally joined by internal apostrophes
_TOKEN_RE = re.compile(r"[^\W_]+(?:'+[^\W_]+)*")


class LexiconError(ValueError):
    """Raised for malformed dictionary files or unresolvable categories."""


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into word tokens.

    Any character that is neither alphanumeric nor an apostrophe separates
    tokens. Apostrophes inside a word are kept (``don't``); leading and
    trailing ones are dropped. Typographic right quotes are read as
    apostrophes.

    >>> tokenize("I love Taylor Swift!")
    ['i', 'love', 'taylor', 'swift']
    >>> tokenize("don't  stop")
    ["don't", 'stop']
    """
    return _TOKEN_RE.findall(text.replace("’", "'").lower())


@dataclass(frozen=True)
class Category:
    name: str
    exact: frozenset[str]
    prefixes: frozenset[str]

    def matches(self, token: str) -> bool:
        if token in self.exact:
            return True
        return any(token.startswith(p) for p in self.prefixes)


@dataclass(frozen=True)
class Lexicon:
    """Immutable collection of named word categories."""

    categories: tuple[Category, ...]
    _exact: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _prefix: Mapping[str, frozenset[str]] = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = [c.name for c in self.categories]
        if len(set(names)) != len(names):
            raise LexiconError("duplicate category names in lexicon")
        exact: dict[str, set[str]] = {}
        prefix: dict[str, set[str]] = {}
        for cat in self.categories:
            for w in cat.exact:
                exact.setdefault(w, set()).add(cat.name)
            for p in cat.prefixes:
                prefix.setdefault(p, set()).add(cat.name)
        object.__setattr__(self, "_exact", {k: frozenset(v) for k, v in exact.items()})
        object.__setattr__(self, "_prefix", {k: frozenset(v) for k, v in prefix.items()})
        object.__setattr__(self, "_cache", {})

    @classmethod
    def from_patterns(cls, patterns: Mapping[str, Iterable[str]]) -> "Lexicon":
        """Build a lexicon from ``{category: ["word", "stem*", ...]}``."""
        cats = []
        for name, pats in patterns.items():
            exact, prefixes = set(), set()
            for p in pats:
                if p.endswith("*"):
                    prefixes.add(p[:-1].lower())
                else:
                    exact.add(p.lower())
            cats.append(Category(name, frozenset(exact), frozenset(prefixes)))
        return cls(tuple(cats))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.categories]

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.categories)

    def get(self, name: str) -> Category:
        for c in self.categories:
            if c.name == name:
                return c
        raise LexiconError(f"category {name!r} not in lexicon")

    def token_categories(self, token: str) -> frozenset[str]:
        """All categories ``token`` belongs to (cached per lexicon)."""
        hit = self._cache.get(token)
        if hit is not None:
            return hit
        found = set(self._exact.get(token, ()))
        for k in range(1, len(token) + 1):
            cats = self._prefix.get(token[:k])
            if cats:
                found.update(cats)
        result = frozenset(found)
        self._cache[token] = result
        return result

    def require(self, names: Sequence[str] = WORKING_CATEGORIES) -> None:
        missing = [n for n in names if n not in self]
        if missing:
            raise LexiconError(f"lexicon is missing categories: {', '.join(missing)}")


def categories_in(tokens: Sequence[str], lex: Lexicon) -> set[str]:
    """Names of categories with at least one matching token."""
    present: set[str] = set()
    for tok in tokens:
        present.update(lex.token_categories(tok))
    return present


def category_rates(tokens: Sequence[str], lex: Lexicon) -> dict[str, float]:
    """Fraction of tokens matching each category; all zeros for no tokens."""
    counts = dict.fromkeys(lex.names, 0)
    for tok in tokens:
        for name in lex.token_categories(tok):
            counts[name] += 1
    n = len(tokens)
    if n == 0:
        return {name: 0.0 for name in counts}
    return {name: c / n for name, c in counts.items()}


def parse_dic(lines: Iterable[str], origin: str = "<dic>") -> Lexicon:
    """Parse LIWC ``.dic`` content.

    The header sits between two lines containing only ``%`` and lists
    ``id<TAB>name`` rows; the body lists ``word<TAB>id[<TAB>id...]``.
    Body entries containing spaces (multi-word phrases) are skipped.
    """
    ids: dict[str, str] = {}
    order: list[str] = []
    patterns: dict[str, list[str]] = {}
    state = "start"
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if state == "start":
            if not line.strip():
                continue
            if line.strip() != "%":
                raise LexiconError(f"{origin}:{lineno}: expected '%' to open header")
            state = "header"
            continue
        if state == "header":
            if line.strip() == "%":
                state = "body"
                continue
            if not line.strip():
                continue
            parts = line.strip().split(None, 1)
            if len(parts) < 2 or not parts[1].strip():
                raise LexiconError(f"{origin}:{lineno}: empty category name")
            cid, name = parts[0], parts[1].strip()
            if cid in ids:
                raise LexiconError(f"{origin}:{lineno}: duplicate category id {cid}")
            if name in patterns:
                raise LexiconError(f"{origin}:{lineno}: duplicate category name {name!r}")
            ids[cid] = name
            order.append(name)
            patterns[name] = []
            continue
        if not line.strip():
            continue
        parts = [p for p in line.split("\t") if p.strip()]
        word = parts[0].strip().lower()
        if len(parts) == 1:
            raise LexiconError(f"{origin}:{lineno}: word {word!r} has no category ids")
        if " " in word:
            continue
        for cid in parts[1:]:
            cid = cid.strip()
            if cid not in ids:
                raise LexiconError(f"{origin}:{lineno}: unknown category id {cid}")
            pats = patterns[ids[cid]]
            if word not in pats:
                pats.append(word)
    if state != "body":
        raise LexiconError(f"{origin}: missing '%' header delimiters")
    return Lexicon.from_patterns({name: patterns[name] for name in order})


def load_dic(path: str | Path) -> Lexicon:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_dic(fh, origin=str(path))


def fallback_lexicon() -> Lexicon:
    """The bundled open dictionary covering the 17 working categories."""
    text = resources.files("botalign").joinpath("data", FALLBACK_DIC).read_text(encoding="utf-8")
    return parse_dic(text.splitlines(), origin=FALLBACK_DIC)


def resolve_lexicon(path: str | Path | None) -> Lexicon:
    return fallback_lexicon() if path is None else load_dic(path)
