"""Crop and rotate augmentation over dependency trees.

Crop keeps one LOI subtree of the root together with the root phrase.
Rotate reorders whole first-level chunks (the LOI subtrees plus the root
chunk).  Both rebuild ids and heads so that every output is a valid tree.

Randomness comes from a per-sentence substream derived from
``(seed, sentence index)``, so the output does not depend on how the
dataset is split across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .conllu import Sentence, Token, sentence_text
from .deptree import (
    ChunkDecomposition,
    DepTree,
    LabelConfig,
    build_tree,
    extract_chunks,
    loi_dependents,
    root_phrase,
    subtree_tokens,
)

__all__ = [
    "OPERATIONS",
    "AugmentConfig",
    "Provenance",
    "AugmentedSentence",
    "crop",
    "all_crops",
    "count_orderings",
    "unrank_permutation",
    "rotate",
    "sample_rotation_indices",
    "sample_rotations",
    "sentence_rng",
    "augment_sentence",
    "augment_dataset",
]

OPERATIONS = ("crop", "rotate")
_U64_MAX = 2**64 - 1

Operation = Literal["crop", "rotate"]


@dataclass(frozen=True)
class AugmentConfig:
    operations: tuple[str, ...] = ("crop",)
    p: float = 1.0
    seed: int = 0
    max_rotations_per_sentence: int | None = None
    labels: LabelConfig = field(default_factory=LabelConfig)
    include_originals: bool = True
    keep_punct: bool = False

    def __post_init__(self):
        ops = (self.operations,) if isinstance(self.operations, str) else tuple(self.operations)
        if not ops:
            raise ValueError("operations must not be empty")
        bad = [o for o in ops if o not in OPERATIONS]
        if bad:
            raise ValueError(f"unknown operations: {bad}")
        object.__setattr__(self, "operations", tuple(o for o in OPERATIONS if o in ops))
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if not 0 <= self.seed <= _U64_MAX:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.max_rotations_per_sentence is not None and self.max_rotations_per_sentence < 1:
            raise ValueError("max_rotations_per_sentence must be positive")


@dataclass(frozen=True)
class Provenance:
    source_index: int
    operation: Operation
    focus_relation: str | None = None
    permutation_index: int | None = None


@dataclass(frozen=True)
class AugmentedSentence:
    sentence: Sentence
    provenance: Provenance | None = None  # None for a copied original

    @property
    def is_original(self) -> bool:
        return self.provenance is None


def _materialize(t: DepTree, order: Sequence[int], comments: Iterable[str] = ()) -> Sentence:
    """Emit the tokens ``order`` (old ids) as a new sentence with remapped ids/heads."""
    new_id = {old: i for i, old in enumerate(order, start=1)}
    tokens = []
    for old in order:
        tok = t.sentence.tokens[old - 1]
        head = 0 if tok.head == 0 else new_id[tok.head]
        tokens.append(
            Token(new_id[old], tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats, head, tok.deprel, tok.deps, tok.misc)
        )
    return Sentence(tuple(tokens), tuple(comments))


def _check_focus(t: DepTree, focus_id: int, cfg: LabelConfig) -> str:
    for dep, rel in loi_dependents(t, cfg):
        if dep == focus_id:
            return rel
    raise ValueError(f"token {focus_id} is not an LOI dependent of the root")


def crop(t: DepTree, focus_id: int, cfg: LabelConfig | None = None, keep_punct: bool = False) -> Sentence:
    """Keep the subtree of ``focus_id`` plus the root phrase, in surface order.

    Root-attached punctuation is dropped unless ``keep_punct``.
    """
    cfg = cfg or LabelConfig()
    _check_focus(t, focus_id, cfg)
    kept = set(subtree_tokens(t, focus_id)) | set(root_phrase(t, cfg))
    if keep_punct:
        for c in t.children[t.root_id]:
            if t.deprel(c).split(":", 1)[0] == "punct":
                kept.update(subtree_tokens(t, c))
    return _materialize(t, sorted(kept))


def all_crops(t: DepTree, cfg: LabelConfig | None = None, keep_punct: bool = False) -> list[Sentence]:
    cfg = cfg or LabelConfig()
    return [crop(t, dep, cfg, keep_punct) for dep, _ in loi_dependents(t, cfg)]


def count_orderings(d: ChunkDecomposition | int) -> int:
    """Number of chunk orderings, (n + 1)!; raises OverflowError past 64 bits."""
    n = d if isinstance(d, int) else d.n
    if n < 0:
        raise ValueError("n must be non-negative")
    total = math.factorial(n + 1)
    if total > _U64_MAX:
        raise OverflowError(f"({n}+1)! does not fit in 64 bits")
    return total


def unrank_permutation(index: int, size: int) -> list[int]:
    """The ``index``-th permutation of ``range(size)`` in lexicographic order."""
    if not 0 <= index < math.factorial(size):
        raise ValueError(f"permutation index {index} out of range for size {size}")
    pool = list(range(size))
    out = []
    for k in range(size - 1, -1, -1):
        q, index = divmod(index, math.factorial(k))
        out.append(pool.pop(q))
    return out


def rotate(t: DepTree, decomposition: ChunkDecomposition, permutation_index: int) -> Sentence:
    """Concatenate the chunks in the order given by ``permutation_index``.

    Index 0 is the identity: units ordered by their first surface position.
    """
    units = decomposition.units()
    order = unrank_permutation(permutation_index, len(units))
    return _materialize(t, [tok for u in order for tok in units[u]])


def sample_rotation_indices(n: int, rng: np.random.Generator, k: int | None = None) -> list[int]:
    """Draw ``k`` (default ``n``) distinct non-identity permutation indices.

    Sampling is uniform without replacement over the (n + 1)! - 1 orderings
    that differ from the identity; the draw is capped at that number.
    """
    if n == 0:
        return []
    available = count_orderings(n) - 1
    k = min(n if k is None else k, available)
    picks = rng.choice(available, size=k, replace=False)
    return [int(x) + 1 for x in picks]


def sample_rotations(
    t: DepTree, cfg: AugmentConfig, rng: np.random.Generator
) -> list[tuple[int, Sentence]]:
    """Return ``(permutation index, sentence)`` for each sampled rotation."""
    d = extract_chunks(t, cfg.labels)
    idx = sample_rotation_indices(d.n, rng, cfg.max_rotations_per_sentence)
    return [(i, rotate(t, d, i)) for i in idx]


def sentence_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _with_provenance(s: Sentence, prov: Provenance) -> Sentence:
    comments = [f"# augmented = {prov.operation}", f"# source_index = {prov.source_index}"]
    if prov.focus_relation is not None:
        comments.append(f"# focus_relation = {prov.focus_relation}")
    if prov.permutation_index is not None:
        comments.append(f"# permutation_index = {prov.permutation_index}")
    comments.append(f"# text = {sentence_text(s.tokens)}")
    return Sentence(s.tokens, tuple(comments))


def augment_sentence(s: Sentence, index: int, cfg: AugmentConfig) -> list[AugmentedSentence]:
    """Original (if requested) followed by the kept synthetic variants of ``s``.

    Candidates are the n crops and then the k sampled rotations; each one is
    kept by its own Bernoulli(p) draw.
    """
    out = [AugmentedSentence(s)] if cfg.include_originals else []
    if s.augmentation_ineligible:
        return out
    rng = sentence_rng(cfg.seed, index)
    t = build_tree(s)
    candidates: list[tuple[Provenance, Sentence]] = []
    if "crop" in cfg.operations:
        for dep, rel in loi_dependents(t, cfg.labels):
            candidates.append((Provenance(index, "crop", focus_relation=rel), crop(t, dep, cfg.labels, cfg.keep_punct)))
    if "rotate" in cfg.operations:
        for perm, rot in sample_rotations(t, cfg, rng):
            candidates.append((Provenance(index, "rotate", permutation_index=perm), rot))
    if not candidates:
        return out
    keep = rng.random(len(candidates)) < cfg.p
    seen = set()
    for (prov, sent), kept in zip(candidates, keep):
        if not kept:
            continue
        key = tuple((tok.form, tok.upos) for tok in sent.tokens)
        if key in seen:
            continue
        seen.add(key)
        out.append(AugmentedSentence(_with_provenance(sent, prov), prov))
    return out


def augment_dataset(sentences: Sequence[Sentence], cfg: AugmentConfig, workers: int = 1) -> list[AugmentedSentence]:
    """Augment every sentence; output keeps input order regardless of ``workers``."""
    if workers > 1 and len(sentences) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(augment_sentence, sentences, range(len(sentences)), [cfg] * len(sentences), chunksize=64)
            return [a for part in parts for a in part]
    out: list[AugmentedSentence] = []
    for i, s in enumerate(sentences):
        out.extend(augment_sentence(s, i, cfg))
    return out
