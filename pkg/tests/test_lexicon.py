import pytest
from hypothesis import given
from hypothesis import strategies as st

from botalign.lexicon import (
    WORKING_CATEGORIES, Lexicon, LexiconError, categories_in, category_rates, parse_dic, tokenize,
)

words = st.text(alphabet="abcdefg'", min_size=1, max_size=6)


@pytest.mark.parametrize("text, expected", [
    ("I love Taylor Swift!", ["i", "love", "taylor", "swift"]),
    ("don't  stop", ["don't", "stop"]),
    ("", []),
    ("'quoted' words'", ["quoted", "words"]),
    ("snake_case x-y", ["snake", "case", "x", "y"]),
    ("It’s fine", ["it's", "fine"]),
])
def test_tokenize(text, expected):
    assert tokenize(text) == expected


@given(st.text())
def test_tokenize_has_no_empty_tokens_and_is_idempotent(text):
    toks = tokenize(text)
    assert all(toks)
    assert tokenize(" ".join(toks)) == toks


DIC = ["%", "1\ti", "2\tpronoun", "%", "i\t1\t2", "me\t1\t2", "my*\t1", "happy\t2"]


def test_parse_dic_exact_and_prefix():
    lex = parse_dic(DIC)
    assert lex.get("i").exact == {"i", "me"}
    assert lex.get("i").prefixes == {"my"}


def test_parse_dic_multi_membership():
    lex = parse_dic(DIC)
    assert "me" in lex.get("pronoun").exact and "me" in lex.get("i").exact


@pytest.mark.parametrize("lines, msg", [
    (["1\ti", "%", "i\t1"], "header"),
    (["%", "1\ti", "%", "happy\t9"], "unknown category id 9"),
    (["%", "1\t", "%"], "empty category name"),
    (["%", "1\ti", "i\t1"], "delimiters"),
])
def test_parse_dic_errors(lines, msg):
    with pytest.raises(LexiconError, match=msg):
        parse_dic(lines)


def test_parse_dic_error_names_line():
    with pytest.raises(LexiconError, match=":5:"):
        parse_dic(["%", "1\ti", "%", "i\t1", "happy\t9"])


def test_categories_in(i_lex):
    assert categories_in(["my", "dog"], i_lex) == {"i"}
    assert categories_in(["myself"], Lexicon.from_patterns({"i": ["my"]})) == set()
    assert categories_in([], i_lex) == set()


def test_category_rates(i_lex):
    assert category_rates(["i", "love", "my", "dog"], i_lex)["i"] == 0.5
    assert category_rates(["dog"], i_lex)["i"] == 0.0
    assert category_rates([], i_lex) == {"i": 0.0}


@given(st.lists(words, max_size=8), st.lists(words, min_size=1, max_size=4))
def test_presence_agrees_with_rates(tokens, patterns):
    lex = Lexicon.from_patterns({"c": patterns})
    toks = [t for t in tokens if tokenize(t) == [t]]
    if not toks:
        return
    rates = category_rates(toks, lex)
    assert categories_in(toks, lex) == {c for c, r in rates.items() if r > 0}


@given(st.lists(words, max_size=8), st.lists(words, min_size=1, max_size=4))
def test_wildcard_never_removes_matches(tokens, patterns):
    plain = Lexicon.from_patterns({"c": [p.rstrip("*") for p in patterns]})
    starred = Lexicon.from_patterns({"c": [p.rstrip("*") + "*" for p in patterns]})
    assert categories_in(tokens, plain) <= categories_in(tokens, starred)


def test_fallback_covers_working_categories(lex):
    lex.require(WORKING_CATEGORIES)
    assert categories_in(tokenize("I think we love the dogs"), lex) >= {
        "i", "we", "cogproc", "posemo", "article", "pronoun"}


def test_require_reports_missing(i_lex):
    with pytest.raises(LexiconError, match="you"):
        i_lex.require(["i", "you"])
