"""Per-sentence SGD with global-norm clipping, dev-driven learning-rate
halving and early stopping."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import UNK, TaggerConfig, TaggerModel, build_vocabs, forward, backward, nll_loss, preprocess

log = logging.getLogger(__name__)


class TrainingError(RuntimeError):
    pass


class NonFiniteGradientError(TrainingError):
    def __init__(self, bad: Sequence[str]):
        self.bad = list(bad)
        super().__init__(f"non-finite gradient in {', '.join(self.bad)}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_acc: float
    lr: float
    improved: bool = False
    aborted: bool = False


def global_norm(grads: dict[str, np.ndarray]) -> float:
    return math.sqrt(sum(float(np.vdot(g, g)) for g in grads.values()))


def sgd_step(model: TaggerModel, grads: dict[str, np.ndarray], lr: float, clip_norm: float | None) -> float:
    """Clip ``grads`` to ``clip_norm`` by global norm, then ``theta -= lr * g`` in place.

    Returns the pre-clipping norm.  Raises NonFiniteGradientError (leaving the
    model untouched) if any gradient entry is NaN or infinite.
    """
    bad = [k for k, g in grads.items() if not np.all(np.isfinite(g))]
    if bad:
        raise NonFiniteGradientError(bad)
    norm = global_norm(grads)
    scale = 1.0
    if clip_norm is not None and norm > clip_norm:
        scale = clip_norm / norm
    step = lr * scale
    for k, g in grads.items():
        model.params[k] -= step * g
    return norm


def gold_indices(model: TaggerModel, s) -> list[int]:
    """Tag indices for ``s``; tags outside the model's vocabulary map to -1."""
    return [model.tag_vocab.get(t.upos, -1) for t in s.tokens]


def evaluate(model: TaggerModel, sentences: Sequence, warn_unknown: bool = True) -> float:
    """Token accuracy.  Gold tags the model has never seen count as errors."""
    if not sentences:
        raise ValueError("cannot evaluate on an empty set")
    correct = total = unknown = 0
    for s in sentences:
        probs, _ = forward(model, model.encode_sentence(s))
        pred = probs.argmax(axis=1)
        gold = gold_indices(model, s)
        for p, g in zip(pred, gold):
            total += 1
            if g < 0:
                unknown += 1
            elif p == g:
                correct += 1
    if unknown and warn_unknown:
        log.warning("%d gold tokens carry tags unknown to the model; counted as errors", unknown)
    return correct / total


def _noisy_words(model: TaggerModel, s, singletons, prob, rng) -> list[list[int]]:
    unk = model.char_vocab[UNK]
    out = []
    for tok in s.tokens:
        ids = []
        for c in preprocess(tok.form):
            if c in singletons and rng.random() < prob:
                ids.append(unk)
            else:
                ids.append(model.char_vocab.get(c, unk))
        out.append(ids)
    return out


def train(
    train_set: Sequence,
    dev_set: Sequence,
    config: TaggerConfig,
    model: TaggerModel | None = None,
    dev_scorer: Callable[[TaggerModel, Sequence], float] | None = None,
    progress: Callable[[EpochRecord], None] | None = None,
) -> tuple[TaggerModel, list[EpochRecord]]:
    """Train a tagger and return the best-on-dev model with the epoch history.

    The dev score of the freshly initialised model is the first reference;
    every epoch that fails to beat the best score so far halves the learning
    rate, and ``early_stop_patience`` such epochs in a row end training.
    """
    if not train_set:
        raise TrainingError("empty training set")
    rng = np.random.default_rng(config.seed)
    char_vocab, tag_vocab, singletons = build_vocabs(train_set)
    if model is None:
        model = TaggerModel(config, char_vocab, tag_vocab, rng=rng)
    scorer = dev_scorer or evaluate
    if config.unk_strategy == "none":
        singletons = frozenset()

    encoded = [(model.encode_sentence(s), gold_indices(model, s)) for s in train_set]
    best_score = scorer(model, dev_set)
    best = model.copy()
    lr = config.lr_initial
    bad_epochs = 0
    history: list[EpochRecord] = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train_set))
        total_loss = 0.0
        aborted = False
        for j in order:
            words, gold = encoded[j]
            if singletons:
                words = _noisy_words(model, train_set[j], singletons, config.unk_replace_prob, rng)
            probs, cache = forward(model, words, rng)
            total_loss += nll_loss(probs, gold)
            grads = backward(model, cache, gold)
            try:
                sgd_step(model, grads, lr, config.clip_norm)
            except NonFiniteGradientError as exc:
                log.error("epoch %d aborted at sentence %d: %s (lr=%g)", epoch, j, exc, lr)
                aborted = True
                break
        score = scorer(model, dev_set)
        improved = score > best_score
        rec = EpochRecord(epoch, total_loss, score, lr, improved, aborted)
        history.append(rec)
        if progress is not None:
            progress(rec)
        if improved:
            best_score = score
            best = model.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            lr *= config.lr_decay
            if bad_epochs >= config.early_stop_patience:
                break
    if all(r.aborted for r in history):
        raise TrainingError("every epoch aborted on non-finite gradients")
    return best, history


def write_history(path, history: Sequence[EpochRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("epoch\ttrain_loss\tdev_acc\tlr\n")
        for r in history:
            f.write(f"{r.epoch}\t{r.train_loss:.6f}\t{r.dev_acc:.6f}\t{r.lr:g}\n")
