"""Character-composed bi-LSTM POS tagger: parameters, forward pass and exact
gradients.

A word is lowercased, wrapped in start/end symbols and read by a character
bi-LSTM; the two final states are mixed linearly into a word vector.  Word
vectors go through a word-level bi-LSTM, and each position's concatenated
states are projected onto the tag set and normalised with a softmax.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

UNK = "<unk>"
BOW = "<w>"
EOW = "</w>"
RESERVED = (UNK, BOW, EOW)
PROB_FLOOR = 1e-12


@dataclass
class TaggerConfig:
    char_embed_dim: int = 200
    char_hidden_dim: int = 200
    word_embed_dim: int = 200
    word_hidden_dim: int = 200
    init_range: float = 0.1
    lr_initial: float = 1.0
    lr_decay: float = 0.5
    dropout_rate: float = 0.5
    clip_norm: float = 5.0
    early_stop_patience: int = 3
    max_epochs: int = 100
    seed: int = 0
    unk_strategy: str = "singleton"  # or "none"
    unk_replace_prob: float = 0.1
    dtype: str = "float64"

    def __post_init__(self):
        for name in ("char_embed_dim", "char_hidden_dim", "word_embed_dim", "word_hidden_dim",
                     "early_stop_patience", "max_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        if self.lr_initial <= 0 or self.clip_norm <= 0 or self.init_range < 0:
            raise ValueError("lr_initial and clip_norm must be positive, init_range non-negative")
        if self.unk_strategy not in ("singleton", "none"):
            raise ValueError(f"unknown unk_strategy {self.unk_strategy!r}")
        if self.dtype not in ("float32", "float64"):
            raise ValueError("dtype must be float32 or float64")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TaggerConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


def preprocess(word) -> tuple[str, ...]:
    """Lowercase and wrap in start/end symbols; already-wrapped input is returned as is."""
    if isinstance(word, tuple) and len(word) >= 2 and word[0] == BOW and word[-1] == EOW:
        return word
    return (BOW, *word.lower(), EOW)


def build_vocabs(sentences: Iterable) -> tuple[dict[str, int], dict[str, int], frozenset[str]]:
    """Character vocabulary (reserved symbols first), tag vocabulary, and singleton characters."""
    chars: Counter = Counter()
    tags = set()
    for s in sentences:
        for tok in s.tokens:
            chars.update(tok.form.lower())
            tags.add(tok.upos)
    char_vocab = {c: i for i, c in enumerate(RESERVED)}
    for c in sorted(chars):
        char_vocab[c] = len(char_vocab)
    tag_vocab = {t: i for i, t in enumerate(sorted(tags))}
    singletons = frozenset(c for c, k in chars.items() if k == 1)
    return char_vocab, tag_vocab, singletons


# parameter name -> shape builder (config, n_chars, n_tags)
def param_shapes(cfg: TaggerConfig, n_chars: int, n_tags: int) -> dict[str, tuple[int, ...]]:
    dc, hc, dw, hw = cfg.char_embed_dim, cfg.char_hidden_dim, cfg.word_embed_dim, cfg.word_hidden_dim
    shapes = {"char_emb": (n_chars, dc)}
    for d in ("fwd", "bwd"):
        shapes[f"char_{d}_Wx"] = (dc, 4 * hc)
        shapes[f"char_{d}_Wh"] = (hc, 4 * hc)
        shapes[f"char_{d}_b"] = (4 * hc,)
    shapes["W_f"] = (dw, hc)
    shapes["W_b"] = (dw, hc)
    shapes["b_w"] = (dw,)
    for d in ("fwd", "bwd"):
        shapes[f"word_{d}_Wx"] = (dw, 4 * hw)
        shapes[f"word_{d}_Wh"] = (hw, 4 * hw)
        shapes[f"word_{d}_b"] = (4 * hw,)
    shapes["W_l"] = (n_tags, 2 * hw)
    shapes["b_l"] = (n_tags,)
    return shapes


class TaggerModel:
    def __init__(self, config: TaggerConfig, char_vocab: dict[str, int], tag_vocab: dict[str, int],
                 params: dict[str, np.ndarray] | None = None, rng: np.random.Generator | None = None):
        self.config = config
        self.char_vocab = dict(char_vocab)
        self.tag_vocab = dict(tag_vocab)
        self.tags = [t for t, _ in sorted(tag_vocab.items(), key=lambda kv: kv[1])]
        shapes = param_shapes(config, len(char_vocab), len(tag_vocab))
        dtype = np.dtype(config.dtype)
        if params is None:
            rng = rng if rng is not None else np.random.default_rng(config.seed)
            r = config.init_range
            params = {k: rng.uniform(-r, r, size=shp).astype(dtype) for k, shp in shapes.items()}
        else:
            for k, shp in shapes.items():
                if params[k].shape != shp:
                    raise ValueError(f"parameter {k} has shape {params[k].shape}, expected {shp}")
            params = {k: np.ascontiguousarray(params[k], dtype=dtype) for k in shapes}
        self.params = params

    @classmethod
    def from_sentences(cls, sentences, config: TaggerConfig, rng=None) -> "TaggerModel":
        char_vocab, tag_vocab, _ = build_vocabs(sentences)
        return cls(config, char_vocab, tag_vocab, rng=rng)

    def copy(self) -> "TaggerModel":
        return TaggerModel(self.config, self.char_vocab, self.tag_vocab,
                           params={k: v.copy() for k, v in self.params.items()})

    @property
    def dtype(self):
        return np.dtype(self.config.dtype)

    def encode_word(self, word) -> list[int]:
        unk = self.char_vocab[UNK]
        return [self.char_vocab.get(c, unk) for c in preprocess(word)]

    def encode_sentence(self, s) -> list[list[int]]:
        return [self.encode_word(tok.form) for tok in s.tokens]


@dataclass
class ForwardCache:
    idx_f: np.ndarray
    idx_b: np.ndarray
    char_f: tuple
    char_b: tuple
    Xf: np.ndarray
    Xb: np.ndarray
    mask: np.ndarray
    hw_f: np.ndarray
    hw_b: np.ndarray
    w_mask: np.ndarray | None
    Xw: np.ndarray
    word_f: tuple
    word_b: tuple
    Xw_rev: np.ndarray
    hcat: np.ndarray
    o_mask: np.ndarray | None
    hcat_d: np.ndarray
    probs: np.ndarray


def _char_batch(words: Sequence[Sequence[int]], dtype):
    """Left-aligned forward and reversed index matrices plus the step mask."""
    T = max(len(w) for w in words)
    B = len(words)
    idx_f = np.zeros((T, B), dtype=np.int64)
    idx_b = np.zeros((T, B), dtype=np.int64)
    mask = np.zeros((T, B), dtype=dtype)
    for j, w in enumerate(words):
        n = len(w)
        idx_f[:n, j] = w
        idx_b[:n, j] = w[::-1]
        mask[:n, j] = 1.0
    return idx_f, idx_b, mask


def _dropout_mask(rng, shape, rate, dtype):
    if rng is None or rate <= 0.0:
        return None
    return ((rng.random(shape) >= rate) / (1.0 - rate)).astype(dtype)


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def compose_words(model: TaggerModel, words: Sequence[Sequence[int]]):
    """Word vectors for already-encoded words, plus what the backward pass needs."""
    p = model.params
    idx_f, idx_b, mask = _char_batch(words, model.dtype)
    Xf = p["char_emb"][idx_f]
    Xb = p["char_emb"][idx_b]
    char_f = kernels.lstm_forward(Xf, mask, p["char_fwd_Wx"], p["char_fwd_Wh"], p["char_fwd_b"])
    char_b = kernels.lstm_forward(Xb, mask, p["char_bwd_Wx"], p["char_bwd_Wh"], p["char_bwd_b"])
    hw_f = char_f[0][-1]
    hw_b = char_b[0][-1]
    w = hw_f @ p["W_f"].T + hw_b @ p["W_b"].T + p["b_w"]
    return w, (idx_f, idx_b, mask, Xf, Xb, char_f, char_b, hw_f, hw_b)


def compose_word(chars, model: TaggerModel) -> np.ndarray:
    """Word vector for one word (a string, or an already preprocessed symbol tuple)."""
    w, _ = compose_words(model, [model.encode_word(chars)])
    return w[0]


def forward(model: TaggerModel, words: Sequence[Sequence[int]], rng: np.random.Generator | None = None):
    """Per-token tag distributions for one sentence of encoded words.

    Dropout is applied only when ``rng`` is given.
    """
    p = model.params
    rate = model.config.dropout_rate
    w, (idx_f, idx_b, mask, Xf, Xb, char_f, char_b, hw_f, hw_b) = compose_words(model, words)
    w_mask = _dropout_mask(rng, w.shape, rate, model.dtype)
    w_d = w if w_mask is None else w * w_mask
    N = w_d.shape[0]
    Xw = np.ascontiguousarray(w_d[:, None, :])
    Xw_rev = np.ascontiguousarray(Xw[::-1])
    ones = np.ones((N, 1), dtype=model.dtype)
    word_f = kernels.lstm_forward(Xw, ones, p["word_fwd_Wx"], p["word_fwd_Wh"], p["word_fwd_b"])
    word_b = kernels.lstm_forward(Xw_rev, ones, p["word_bwd_Wx"], p["word_bwd_Wh"], p["word_bwd_b"])
    h_f = word_f[0][1:, 0]
    h_b = word_b[0][1:, 0][::-1]
    hcat = np.concatenate([h_f, h_b], axis=1)
    o_mask = _dropout_mask(rng, hcat.shape, rate, model.dtype)
    hcat_d = hcat if o_mask is None else hcat * o_mask
    probs = softmax(hcat_d @ p["W_l"].T + p["b_l"])
    cache = ForwardCache(idx_f, idx_b, char_f, char_b, Xf, Xb, mask, hw_f, hw_b, w_mask,
                         Xw, word_f, word_b, Xw_rev, hcat, o_mask, hcat_d, probs)
    return probs, cache


def encode_and_predict(s, model: TaggerModel) -> np.ndarray:
    """Tag probability rows, one per token of sentence ``s`` (no dropout)."""
    probs, _ = forward(model, model.encode_sentence(s))
    return probs


def predict_tags(s, model: TaggerModel) -> list[str]:
    probs = encode_and_predict(s, model)
    return [model.tags[i] for i in probs.argmax(axis=1)]


_clamp_events = 0


def clamp_events() -> int:
    """How many times ``nll_loss`` has had to floor a zero gold probability."""
    return _clamp_events


def nll_loss(probs: np.ndarray, gold: Sequence[int]) -> float:
    global _clamp_events
    probs = np.asarray(probs)
    if len(probs) != len(gold):
        raise ValueError(f"{len(probs)} probability rows for {len(gold)} gold tags")
    pg = probs[np.arange(len(gold)), np.asarray(gold, dtype=np.int64)]
    low = pg < PROB_FLOOR
    if low.any():
        _clamp_events += int(low.sum())
        log.warning("gold probability below %g clamped (%d events so far)", PROB_FLOOR, _clamp_events)
        pg = np.maximum(pg, PROB_FLOOR)
    return float(-np.log(pg).sum())


def backward(model: TaggerModel, cache: ForwardCache, gold: Sequence[int]) -> dict[str, np.ndarray]:
    """Exact gradients of ``nll_loss`` for the forward pass recorded in ``cache``."""
    p = model.params
    c = cache
    grads = {}
    N = len(gold)
    dlogits = c.probs.copy()
    dlogits[np.arange(N), np.asarray(gold, dtype=np.int64)] -= 1.0
    grads["W_l"] = dlogits.T @ c.hcat_d
    grads["b_l"] = dlogits.sum(axis=0)
    dhcat = dlogits @ p["W_l"]
    if c.o_mask is not None:
        dhcat = dhcat * c.o_mask
    Hw = model.config.word_hidden_dim
    dH_f = np.ascontiguousarray(dhcat[:, None, :Hw])
    dH_b = np.ascontiguousarray(dhcat[::-1, None, Hw:])
    ones = np.ones((N, 1), dtype=model.dtype)
    dXw, grads["word_fwd_Wx"], grads["word_fwd_Wh"], grads["word_fwd_b"] = kernels.lstm_backward(
        dH_f, c.Xw, ones, p["word_fwd_Wx"], p["word_fwd_Wh"], *c.word_f)
    dXw_rev, grads["word_bwd_Wx"], grads["word_bwd_Wh"], grads["word_bwd_b"] = kernels.lstm_backward(
        dH_b, c.Xw_rev, ones, p["word_bwd_Wx"], p["word_bwd_Wh"], *c.word_b)
    dw = dXw[:, 0] + dXw_rev[::-1, 0]
    if c.w_mask is not None:
        dw = dw * c.w_mask
    grads["W_f"] = dw.T @ c.hw_f
    grads["W_b"] = dw.T @ c.hw_b
    grads["b_w"] = dw.sum(axis=0)
    T, B = c.mask.shape
    Hc = model.config.char_hidden_dim
    dHc_f = np.zeros((T, B, Hc), dtype=model.dtype)
    dHc_b = np.zeros((T, B, Hc), dtype=model.dtype)
    dHc_f[-1] = dw @ p["W_f"]
    dHc_b[-1] = dw @ p["W_b"]
    dXf, grads["char_fwd_Wx"], grads["char_fwd_Wh"], grads["char_fwd_b"] = kernels.lstm_backward(
        dHc_f, c.Xf, c.mask, p["char_fwd_Wx"], p["char_fwd_Wh"], *c.char_f)
    dXb, grads["char_bwd_Wx"], grads["char_bwd_Wh"], grads["char_bwd_b"] = kernels.lstm_backward(
        dHc_b, c.Xb, c.mask, p["char_bwd_Wx"], p["char_bwd_Wh"], *c.char_b)
    demb = np.zeros_like(p["char_emb"])
    np.add.at(demb, c.idx_f, dXf)
    np.add.at(demb, c.idx_b, dXb)
    grads["char_emb"] = demb
    return grads


def loss_and_grads(model: TaggerModel, words, gold, rng=None):
    probs, cache = forward(model, words, rng)
    return nll_loss(probs, gold), backward(model, cache, gold)
