from pathlib import Path

import pytest

from treeaug.conllu import Sentence, Token, read_conllu

DATA = Path(__file__).parent / "data"


def make_sentence(rows, comments=()):
    """Build a sentence from (form, upos, head, deprel) rows."""
    tokens = [
        Token(i, form, "_", upos, "_", "_", head, deprel, "_", "_")
        for i, (form, upos, head, deprel) in enumerate(rows, start=1)
    ]
    return Sentence(tokens, comments)


FIG1A_ROWS = [
    ("Babası", "NOUN", 5, "nsubj"),
    ("ona", "PRON", 5, "iobj"),
    ("bir", "DET", 4, "det"),
    ("mektup", "NOUN", 5, "obj"),
    ("yazdı", "VERB", 0, "root"),
]


@pytest.fixture
def fig1a():
    return read_conllu(DATA / "fig1a.conllu")[0]


@pytest.fixture
def tiny5():
    return read_conllu(DATA / "tiny5.conllu")


@pytest.fixture
def data_dir():
    return DATA
