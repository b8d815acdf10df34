"""Treebank statistics, size eligibility and the size-vs-gain correlation."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .conllu import Sentence
from .deptree import LabelConfig, build_tree, loi_dependents

MIN_TOKENS = 5_000
MAX_TOKENS = 120_000
BUCKETS = ((20_000, "<20K"), (80_000, "<80K"), (120_000, "<120K"))


class CorrelationError(ValueError):
    pass


@dataclass
class TreebankStats:
    sentences: int
    tokens: int
    invalid_sentences: int
    ineligible_sentences: int
    loi_histogram: dict[int, int] = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return eligibility(self.tokens)

    @property
    def bucket(self) -> str | None:
        return size_bucket(self.tokens)


def eligibility(tokens: int) -> str:
    if tokens < MIN_TOKENS:
        return "ignored (<5K)"
    if tokens >= MAX_TOKENS:
        return "ignored (>=120K)"
    return "eligible"


def size_bucket(tokens: int) -> str | None:
    for limit, name in BUCKETS:
        if tokens < limit:
            return name
    return None


def treebank_stats(sentences: Sequence[Sentence], labels: LabelConfig | None = None) -> TreebankStats:
    labels = labels or LabelConfig()
    hist: Counter = Counter()
    invalid = ineligible = 0
    for s in sentences:
        if not s.is_valid:
            invalid += 1
        if s.augmentation_ineligible:
            ineligible += 1
            continue
        hist[len(loi_dependents(build_tree(s), labels))] += 1
    return TreebankStats(
        sentences=len(sentences),
        tokens=sum(len(s.tokens) for s in sentences),
        invalid_sentences=invalid,
        ineligible_sentences=ineligible,
        loi_histogram=dict(sorted(hist.items())),
    )


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise CorrelationError("x and y differ in length")
    n = len(xs)
    if n < 2:
        raise CorrelationError("undefined correlation: need at least 2 pairs")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("undefined correlation: zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def read_pairs(path) -> list[tuple[float, float]]:
    """Two numeric columns per line; blank lines, ``#`` comments and a header are skipped."""
    pairs = []
    first = True
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.replace(",", " ").split()
            try:
                x, y = float(cols[0]), float(cols[1])
            except (ValueError, IndexError):
                if first:
                    first = False
                    continue  # header
                raise ValueError(f"line {lineno}: expected two numbers, got {line!r}") from None
            first = False
            pairs.append((x, y))
    return pairs


def fit_line(xs, ys) -> tuple[float, float]:
    """Least-squares slope and intercept."""
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    sxx = math.fsum((x - mx) ** 2 for x in xs)
    slope = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sxx
    return slope, my - slope * mx
