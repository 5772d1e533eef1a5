"""Minor rewrites of a passage by span replacement.

Two fill policies exist: ``mask_fill_backend`` forwards to a remote mask-filling
model over HTTP, and ``lexical_local`` replaces every word in each masked span
with a same-length word drawn from a bundled frequency-ranked lexicon.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from detectllm.errors import FillFailure, TextTooShort

POLICIES = ("lexical_local", "mask_fill_backend")
MAX_REDRAWS = 3
MAX_LENGTH_CHANGE = 0.2

_WORD_PARTS = re.compile(r"^(\W*)(.*?)(\W*)$", re.S)


@dataclass(frozen=True)
class PerturbationConfig:
    n: int = 50
    mask_fraction: float = 0.15
    span_length: int = 2
    policy: str = "lexical_local"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 < self.mask_fraction < 1:
            raise ValueError("mask_fraction must be in (0, 1)")
        if self.span_length < 1:
            raise ValueError("span_length must be >= 1")
        if self.policy not in POLICIES:
            raise ValueError(f"unknown perturbation policy {self.policy!r}")

    @property
    def min_words(self) -> int:
        return math.ceil(self.span_length / self.mask_fraction - 1e-9)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mask_fraction": self.mask_fraction,
            "span_length": self.span_length,
            "policy": self.policy,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class PerturbationSet:
    original_id: str
    variants: tuple[str, ...]
    config: PerturbationConfig
    # word-index starts of masked spans per variant (lexical_local only)
    spans: tuple[tuple[int, ...], ...] | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.variants)


@lru_cache(maxsize=None)
def load_lexicon() -> tuple[str, ...]:
    text = resources.files("detectllm.data").joinpath("lexicon.txt").read_text(encoding="utf-8")
    return tuple(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def span_count(word_count: int, cfg: PerturbationConfig) -> int:
    """Number of masked spans: ceil(mask_fraction * words / span_length)."""
    # the slack absorbs products like 0.15 * 40 = 6.000000000000001
    return max(1, math.ceil(cfg.mask_fraction * word_count / cfg.span_length - 1e-9))


def choose_spans(word_count: int, n_spans: int, span_length: int, rng: np.random.Generator) -> list[int]:
    """Uniformly random non-overlapping span starts, sorted."""
    slots = word_count - n_spans * span_length + n_spans
    if slots < n_spans:
        raise TextTooShort(f"{word_count} words cannot hold {n_spans} spans of length {span_length}")
    picks = np.sort(rng.choice(slots, size=n_spans, replace=False))
    return [int(c) + i * (span_length - 1) for i, c in enumerate(picks)]


class LexicalReplacer:
    """Same-length substitutes sampled with Zipf weights over lexicon rank."""

    def __init__(self, lexicon: tuple[str, ...] | None = None):
        self.lexicon = tuple(lexicon) if lexicon is not None else load_lexicon()
        self.weights = 1.0 / np.arange(1, len(self.lexicon) + 1)
        self.by_length: dict[int, np.ndarray] = {}
        for i, w in enumerate(self.lexicon):
            self.by_length.setdefault(len(w), []).append(i)
        self.by_length = {k: np.array(v) for k, v in self.by_length.items()}
        self.all = np.arange(len(self.lexicon))
        self._memo: dict[str, tuple[np.ndarray, np.ndarray]] = {}

    def candidates(self, core: str) -> tuple[np.ndarray, np.ndarray]:
        key = core.lower()
        hit = self._memo.get(key)
        if hit is None:
            pool = self.by_length.get(len(core), self.all)
            pool = pool[[self.lexicon[i] != key for i in pool]]
            if len(pool) == 0:
                pool = self.all[[w != key for w in self.lexicon]]
            w = self.weights[pool]
            hit = self._memo[key] = (pool, w / w.sum())
        return hit

    def replace(self, word: str, rng: np.random.Generator) -> str:
        lead, core, trail = _WORD_PARTS.match(word).groups()
        if not core:
            return word
        pool, probs = self.candidates(core)
        sub = self.lexicon[int(pool[rng.choice(len(pool), p=probs)])]
        if core[0].isupper():
            sub = sub[0].upper() + sub[1:]
        return lead + sub + trail


_default_replacer: LexicalReplacer | None = None


def _replacer() -> LexicalReplacer:
    global _default_replacer
    if _default_replacer is None:
        _default_replacer = LexicalReplacer()
    return _default_replacer


def _lexical_variant(words, cfg, rng, replacer):
    starts = choose_spans(len(words), span_count(len(words), cfg), cfg.span_length, rng)
    out = list(words)
    for s in starts:
        for j in range(s, s + cfg.span_length):
            out[j] = replacer.replace(words[j], rng)
    return " ".join(out), tuple(starts)


def _acceptable(variant: str, original: str, n_words: int) -> bool:
    if variant.strip() == original.strip():
        return False
    return abs(len(variant.split()) - n_words) <= MAX_LENGTH_CHANGE * n_words


def perturb(text: str, cfg: PerturbationConfig, backend=None, text_id: str = "",
            replacer: LexicalReplacer | None = None) -> PerturbationSet:
    """Produce ``cfg.n`` rewrites of ``text``, each different from it.

    A variant identical to the original is re-drawn up to three times; after
    that the whole sample fails with :class:`FillFailure`.
    """
    words = text.split()
    if len(words) < cfg.min_words:
        raise TextTooShort(
            f"text {text_id!r} has {len(words)} words; need >= {cfg.min_words} for "
            f"span_length={cfg.span_length}, mask_fraction={cfg.mask_fraction}"
        )
    if cfg.policy == "mask_fill_backend":
        if backend is None or not hasattr(backend, "perturb"):
            raise ValueError("mask_fill_backend policy needs a backend exposing /v1/perturb")
        return _perturb_remote(text, words, cfg, backend, text_id)

    replacer = replacer or _replacer()
    variants, spans = [], []
    for i in range(cfg.n):
        for attempt in range(MAX_REDRAWS + 1):
            rng = np.random.default_rng([cfg.seed, i, attempt])
            variant, starts = _lexical_variant(words, cfg, rng, replacer)
            if variant != " ".join(words):
                break
        else:
            raise FillFailure(f"text {text_id!r}: variant {i} unchanged after {MAX_REDRAWS} redraws")
        variants.append(variant)
        spans.append(starts)
    return PerturbationSet(text_id, tuple(variants), cfg, tuple(spans))


def _perturb_remote(text, words, cfg, backend, text_id):
    n_words = len(words)
    with backend.session():
        got = backend.perturb(text, cfg.n, cfg.mask_fraction, cfg.span_length, cfg.seed)
    if len(got) != cfg.n:
        raise FillFailure(f"backend returned {len(got)} perturbations, expected {cfg.n}")
    variants = list(got)
    for attempt in range(1, MAX_REDRAWS + 1):
        bad = [i for i, v in enumerate(variants) if not _acceptable(v, text, n_words)]
        if not bad:
            break
        with backend.session():
            redo = backend.perturb(text, len(bad), cfg.mask_fraction, cfg.span_length,
                                   cfg.seed + attempt * 1_000_003)
        for i, v in zip(bad, redo):
            variants[i] = v
    if any(not _acceptable(v, text, n_words) for v in variants):
        raise FillFailure(f"text {text_id!r}: mask fill left variants unchanged after {MAX_REDRAWS} redraws")
    return PerturbationSet(text_id, tuple(variants), cfg)
