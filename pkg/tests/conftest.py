import pytest

from botalign.corpus import Dialogue, Label
from botalign.lexicon import Lexicon, fallback_lexicon


@pytest.fixture(scope="session")
def lex():
    return fallback_lexicon()


@pytest.fixture
def i_lex():
    return Lexicon.from_patterns({"i": ["i", "me", "my*"]})


def dlg(*turns, label=Label.HUMAN_HUMAN, id="d", source="t"):
    """Build a dialogue from ("h"|"u", text) pairs."""
    names = {"h": "human", "u": "unknown"}
    return Dialogue.build(id, source, label, [(names[s], t) for s, t in turns])
