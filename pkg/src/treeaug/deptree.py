"""Head-indexed tree view over a sentence and the chunk decomposition used by
the crop and rotate operators."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .conllu import ConlluValidationError, Sentence

__all__ = [
    "DEFAULT_LOI",
    "DEFAULT_ROOT_PHRASE",
    "DepTree",
    "LabelConfig",
    "ChunkDecomposition",
    "TreeError",
    "build_tree",
    "subtree_tokens",
    "loi_dependents",
    "root_phrase",
    "extract_chunks",
    "load_label_config",
]

DEFAULT_LOI = frozenset({"nsubj", "obj", "iobj", "obl"})
DEFAULT_ROOT_PHRASE = frozenset({"fixed", "flat", "cop", "compound"})
DEFAULT_ALIASES = {"dobj": "obj"}


class TreeError(ConlluValidationError):
    pass


def _label_set(labels: Iterable[str]) -> frozenset[str]:
    out = frozenset(x.strip() for x in labels if x.strip())
    if not out:
        raise ValueError("label set must not be empty")
    bad = sorted(x for x in out if ":" in x)
    if bad:
        raise ValueError(f"base labels must not contain ':': {bad}")
    return out


@dataclass(frozen=True)
class LabelConfig:
    loi: frozenset[str] = DEFAULT_LOI
    root_phrase: frozenset[str] = DEFAULT_ROOT_PHRASE
    match_subtypes: bool = True
    aliases: Mapping[str, str] = field(default_factory=lambda: dict(DEFAULT_ALIASES))

    def __post_init__(self):
        object.__setattr__(self, "loi", _label_set(self.loi))
        object.__setattr__(self, "root_phrase", _label_set(self.root_phrase))

    def __hash__(self):
        return hash((self.loi, self.root_phrase, self.match_subtypes, tuple(sorted(self.aliases.items()))))

    def base(self, deprel: str) -> str:
        label = deprel.split(":", 1)[0] if self.match_subtypes else deprel
        return self.aliases.get(label, label)

    def is_loi(self, deprel: str) -> bool:
        return self.base(deprel) in self.loi

    def is_root_phrase(self, deprel: str) -> bool:
        return self.base(deprel) in self.root_phrase


def load_label_config(path, **overrides) -> LabelConfig:
    """Read ``key = value`` lines (``loi``, ``root_phrase``, ``match_subtypes``).

    List values are comma or whitespace separated.  Keyword ``overrides``
    that are not None replace values from the file.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path, encoding="utf-8") as f:
        parser.read_string("[labels]\n" + f.read())
    sec = parser["labels"]
    kwargs = {}
    for key in ("loi", "root_phrase"):
        if key in sec:
            kwargs[key] = sec[key].replace(",", " ").split()
    if "match_subtypes" in sec:
        kwargs["match_subtypes"] = sec.getboolean("match_subtypes")
    unknown = set(sec) - {"loi", "root_phrase", "match_subtypes"}
    if unknown:
        raise ValueError(f"unknown label config keys: {sorted(unknown)}")
    kwargs.update({k: v for k, v in overrides.items() if v is not None})
    return LabelConfig(**kwargs)


@dataclass(frozen=True)
class DepTree:
    sentence: Sentence
    children: Mapping[int, tuple[int, ...]]
    root_id: int

    def __len__(self):
        return len(self.sentence.tokens)

    def deprel(self, token_id: int) -> str:
        return self.sentence.tokens[token_id - 1].deprel

    def head(self, token_id: int) -> int:
        return self.sentence.tokens[token_id - 1].head


@dataclass(frozen=True)
class ChunkDecomposition:
    root_chunk: tuple[int, ...]
    flexible_chunks: tuple[tuple[str, tuple[int, ...]], ...]

    @property
    def n(self) -> int:
        return len(self.flexible_chunks)

    def units(self) -> list[tuple[int, ...]]:
        """All n + 1 movable units, ordered by their first surface position."""
        chunks = [self.root_chunk] + [ids for _, ids in self.flexible_chunks]
        return sorted(chunks, key=lambda c: c[0])


def build_tree(s: Sentence) -> DepTree:
    if s.violations:
        raise TreeError(s.violations)
    children: dict[int, list[int]] = {t.id: [] for t in s.tokens}
    root_id = 0
    for t in s.tokens:
        if t.head == 0:
            root_id = t.id
        else:
            children[t.head].append(t.id)
    return DepTree(s, {k: tuple(v) for k, v in children.items()}, root_id)


def subtree_tokens(t: DepTree, token_id: int) -> list[int]:
    if token_id not in t.children:
        raise KeyError(f"no token with id {token_id}")
    out = []
    stack = [token_id]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(t.children[node])
    return sorted(out)


def loi_dependents(t: DepTree, cfg: LabelConfig) -> list[tuple[int, str]]:
    """First-level LOI dependents of the root as ``(id, deprel)`` in surface order."""
    return [(c, t.deprel(c)) for c in t.children[t.root_id] if cfg.is_loi(t.deprel(c))]


def root_phrase(t: DepTree, cfg: LabelConfig) -> list[int]:
    out = []
    stack = [t.root_id]
    while stack:
        node = stack.pop()
        out.append(node)
        stack.extend(c for c in t.children[node] if cfg.is_root_phrase(t.deprel(c)))
    return sorted(out)


def extract_chunks(t: DepTree, cfg: LabelConfig) -> ChunkDecomposition:
    flexible = []
    taken: set[int] = set()
    for dep, rel in loi_dependents(t, cfg):
        ids = subtree_tokens(t, dep)
        taken.update(ids)
        flexible.append((rel, tuple(ids)))
    rest = tuple(tok.id for tok in t.sentence.tokens if tok.id not in taken)
    return ChunkDecomposition(rest, tuple(flexible))
