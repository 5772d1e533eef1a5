"""Word-level n-gram language model used as the desk-scale scoring oracle.

At each order a token seen after the context gets its Laplace-smoothed
relative frequency ``(c + alpha) / (C + alpha * V)``. The smoothing mass left
over, ``alpha * U / (C + alpha * V)`` with ``U`` unseen tokens, is shared among
the unseen tokens in proportion to the next-lower-order distribution. Contexts
never observed fall straight through to the lower order, and order 0 is
uniform, so every distribution is normalised over the whole vocabulary.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from detectllm.backend.base import (
    DecodingConfig,
    DistributionBackend,
    pick_token,
    word_detokenize,
    word_tokenize,
)
from detectllm.errors import EmptyCorpus

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
SPECIALS = (BOS, EOS, UNK)


class ToyModel(DistributionBackend):
    """Immutable n-gram model; safe for concurrent reads."""

    def __init__(
        self,
        order: int,
        vocabulary: Sequence[str],
        counts: dict[int, dict[tuple[int, ...], dict[int, int]]],
        alpha: float,
        seed: int = 0,
    ):
        super().__init__(vocabulary)
        self.order = order
        self.counts = counts
        self.alpha = alpha
        self.seed = seed
        self.bos = self.index[BOS]
        self.eos = self.index[EOS]
        self._blocked = np.array([self.index[BOS], self.index[UNK]])
        self._cache: dict[tuple[int, tuple[int, ...]], tuple] = {}
        digest = hashlib.sha256(self.dumps().encode()).hexdigest()[:12]
        self.backend_id = f"toy-{order}gram-{digest}"

    # -- distribution -------------------------------------------------------

    def _key(self, context: Sequence[int]) -> tuple[int, ...]:
        padded = [self.bos] * (self.order - 1) + list(context)
        return tuple(padded[len(padded) - (self.order - 1):]) if self.order > 1 else ()

    def _dist(self, k: int, key: tuple[int, ...]) -> np.ndarray:
        if k == 0:
            return np.full(self.vocab_size, 1.0 / self.vocab_size)
        hit = self._cache.get((k, key))
        if hit is not None:
            return hit[0]
        lower = self._dist(k - 1, key[1:])
        table = self.counts[k].get(key)
        if not table:
            vec = lower
        else:
            V, a = self.vocab_size, self.alpha
            z = sum(table.values()) + a * V
            seen = np.fromiter(table.keys(), dtype=int, count=len(table))
            vec = lower.copy()
            unseen_mass = lower.sum() - lower[seen].sum()
            left = a * (V - len(seen)) / z
            vec *= left / unseen_mass if unseen_mass > 0 else 0.0
            vec[seen] = (np.fromiter(table.values(), dtype=float, count=len(table)) + a) / z
        nz = vec[vec > 0]
        entropy = max(float(-(nz * np.log(nz)).sum()), 0.0)
        self._cache[(k, key)] = (vec, entropy)
        return vec

    def distribution(self, context: Sequence[int]) -> np.ndarray:
        return self._dist(self.order, self._key(context)).copy()

    def position_stats(self, context, token):
        key = self._key(context)
        vec = self._dist(self.order, key)
        entropy = self._cache[(self.order, key)][1]
        p = vec[token]
        return math.log(p), 1 + int(np.count_nonzero(vec > p)), entropy

    def prob(self, token: str, context: Sequence[str]) -> float:
        ids = self.encode(context)
        return float(self.distribution(ids)[self.index[token]])

    # -- generation ---------------------------------------------------------

    def generate(self, prompt: str, max_tokens: int, cfg: DecodingConfig) -> str:
        rng = np.random.default_rng(cfg.seed)
        ids = self.encode(self.tokenize(prompt))
        out: list[str] = []
        for _ in range(max_tokens):
            probs = self.distribution(ids)
            probs[self._blocked] = 0.0
            probs /= probs.sum()
            nxt = pick_token(probs, cfg, rng)
            if nxt == self.eos:
                break
            ids.append(nxt)
            out.append(self.vocab[nxt])
        return word_detokenize(out)

    # -- persistence --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "format": "detectllm-toy-ngram/1",
            "order": self.order,
            "alpha": self.alpha,
            "seed": self.seed,
            "vocabulary": self.vocab,
            "counts": {
                str(k): [
                    [list(ctx), sorted(table.items())]
                    for ctx, table in sorted(self.counts[k].items())
                ]
                for k in sorted(self.counts)
            },
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, obj: dict) -> "ToyModel":
        counts = {
            int(k): {tuple(ctx): {int(t): int(c) for t, c in items} for ctx, items in rows}
            for k, rows in obj["counts"].items()
        }
        return cls(obj["order"], obj["vocabulary"], counts, obj["alpha"], obj.get("seed", 0))

    @classmethod
    def load(cls, path) -> "ToyModel":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def train_toy_lm(corpus: Iterable[str], order: int = 3, alpha: float = 0.01, seed: int = 0) -> ToyModel:
    """Count n-grams of every order up to ``order`` over the word-tokenised corpus.

    Each corpus string is one sequence, padded with ``order - 1`` begin
    markers and closed by an end marker.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    docs = [word_tokenize(text) for text in corpus]
    docs = [d for d in docs if d]
    if not docs:
        raise EmptyCorpus("corpus has no tokens")

    words = sorted({w for d in docs for w in d} - set(SPECIALS))
    vocab = words + list(SPECIALS)
    index = {w: i for i, w in enumerate(vocab)}
    bos, eos = index[BOS], index[EOS]

    raw: dict[int, dict[tuple[int, ...], Counter]] = {k: defaultdict(Counter) for k in range(1, order + 1)}
    for doc in docs:
        seq = [bos] * (order - 1) + [index[w] for w in doc] + [eos]
        for i in range(order - 1, len(seq)):
            for k in range(1, order + 1):
                ctx = tuple(seq[i - k + 1:i]) if k > 1 else ()
                raw[k][ctx][seq[i]] += 1
    counts = {k: {ctx: dict(sorted(c.items())) for ctx, c in sorted(tab.items())} for k, tab in raw.items()}
    return ToyModel(order, vocab, counts, alpha, seed)
