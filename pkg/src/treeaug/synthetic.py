"""Toy treebank generator: a case-marking, verb-final mini-language.

Nouns carry case suffixes (accusative, dative, locative) so that a
character-level tagger has something morphological to learn, and the
argument order is loose so that rotation produces plausible variants.
Relations: nsubj, obj, iobj, obl, det, punct, root.  Tags: NOUN, VERB,
DET, PRON, PUNCT.
"""

from __future__ import annotations

import numpy as np

from .conllu import Sentence, Token, sentence_text

NOUNS = [
    "adam", "kadın", "kedi", "köpek", "okul", "masa", "elma", "mektup", "baba",
    "anne", "kız", "oğlan", "şehir", "bahçe", "araba", "kitap", "çocuk", "ev",
    "deniz", "orman", "kapı", "doktor", "öğretmen", "kuş",
]
VERBS = [
    "yazdı", "gördü", "verdi", "aldı", "getirdi", "okudu", "sevdi", "gönderdi",
    "bekledi", "buldu", "anlattı", "gösterdi", "sattı", "bıraktı",
]
DETS = ["bir", "bu", "şu", "her"]
PRONOUNS = {"nom": ["o", "ben", "sen", "biz"], "acc": ["onu", "beni", "seni"], "dat": ["ona", "bana", "sana"],
            "loc": ["orada", "burada"]}

_BACK = set("aıou")
_VOWELS = set("aeıioöuü")


def _last_vowel(stem: str) -> str:
    for ch in reversed(stem):
        if ch in _VOWELS:
            return ch
    return "e"


def inflect(stem: str, case: str) -> str:
    v = _last_vowel(stem)
    ends_vowel = stem[-1] in _VOWELS
    if case == "nom":
        return stem
    if case == "acc":
        hv = {"a": "ı", "ı": "ı", "e": "i", "i": "i", "o": "u", "u": "u", "ö": "ü", "ü": "ü"}[v]
        return stem + ("y" if ends_vowel else "") + hv
    if case == "dat":
        return stem + ("y" if ends_vowel else "") + ("a" if v in _BACK else "e")
    if case == "loc":
        return stem + ("da" if v in _BACK else "de")
    raise ValueError(case)


_CASE = {"nsubj": "nom", "obj": "acc", "iobj": "dat", "obl": "loc"}


def _argument(rel: str, rng) -> list[tuple[str, str, str]]:
    """(form, upos, deprel) rows for one argument; the head is the last row."""
    case = _CASE[rel]
    if rng.random() < 0.2:
        return [(rng.choice(PRONOUNS[case]), "PRON", rel)]
    rows = []
    if rng.random() < 0.35:
        rows.append((rng.choice(DETS), "DET", "det"))
    rows.append((inflect(rng.choice(NOUNS), case), "NOUN", rel))
    return rows


def generate_sentence(rng: np.random.Generator, sent_id: str) -> Sentence:
    rels = [r for r, prob in (("nsubj", 0.9), ("iobj", 0.35), ("obl", 0.35), ("obj", 0.6)) if rng.random() < prob]
    # mostly canonical order, occasionally shuffled
    if rng.random() < 0.3:
        rels = [rels[i] for i in rng.permutation(len(rels))]
    args = [_argument(r, rng) for r in rels]
    verb_first = rng.random() < 0.1
    rows: list[tuple[str, str, str, int | None]] = []  # head None = verb, -1 = root
    verb = (str(rng.choice(VERBS)), "VERB", "root", -1)
    if verb_first:
        rows.append(verb)
    for arg in args:
        start = len(rows)
        for k, (form, upos, rel) in enumerate(arg):
            head = start + len(arg) - 1 if k < len(arg) - 1 else None
            rows.append((str(form), upos, rel, head))
    if not verb_first:
        rows.append(verb)
    if rng.random() < 0.9:
        rows.append((".", "PUNCT", "punct", None))
    verb_pos = next(i for i, r in enumerate(rows) if r[3] == -1)
    tokens = []
    for i, (form, upos, rel, head) in enumerate(rows):
        if head == -1:
            h = 0
        elif head is None:
            h = verb_pos + 1
        else:
            h = head + 1
        tokens.append(Token(i + 1, form, "_", upos, "_", "_", h, rel, "_", "_"))
    comments = (f"# sent_id = {sent_id}", f"# text = {sentence_text(tokens)}")
    return Sentence(tuple(tokens), comments)


def generate_treebank(n: int, seed: int = 2018, prefix: str = "synth") -> list[Sentence]:
    rng = np.random.default_rng(seed)
    return [generate_sentence(rng, f"{prefix}-{i + 1:03d}") for i in range(n)]


def bundled_path(split: str):
    """Path of a bundled synthetic split: ``train``, ``dev`` or ``test``."""
    from importlib.resources import files

    if split not in ("train", "dev", "test"):
        raise ValueError(split)
    return files("treeaug") / "data" / f"synthetic-{split}.conllu"


SPLITS = {"train": (0, 140), "dev": (140, 170), "test": (170, 200)}


def write_bundled(directory, seed: int = 2018) -> None:
    from pathlib import Path

    from .conllu import write_conllu

    sents = generate_treebank(200, seed)
    for split, (a, b) in SPLITS.items():
        write_conllu(Path(directory) / f"synthetic-{split}.conllu", sents[a:b])
