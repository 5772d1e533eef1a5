"""Core scoring records and the backend contract."""

from __future__ import annotations

import contextlib
import math
import re
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from detectllm.errors import InvariantViolation, TextTooShort

DEFAULT_MAX_SCORED = 512
_ENTROPY_SLACK = 1e-9

STRATEGIES = ("temperature", "top_k", "top_p")


@dataclass(frozen=True)
class TokenStats:
    token_text: str
    log_prob: float
    rank: int
    entropy: float

    def check(self, vocab_size: int | None = None, record_id: str | None = None) -> None:
        if not math.isfinite(self.log_prob) or self.log_prob > 0:
            raise InvariantViolation(
                f"log_prob must be finite and <= 0, got {self.log_prob}", record_id
            )
        if isinstance(self.rank, bool) or not isinstance(self.rank, (int, np.integer)) or self.rank < 1:
            raise InvariantViolation(f"rank must be an integer >= 1, got {self.rank!r}", record_id)
        if not math.isfinite(self.entropy) or self.entropy < -_ENTROPY_SLACK:
            raise InvariantViolation(f"entropy must be >= 0, got {self.entropy}", record_id)
        if vocab_size is not None and self.entropy > math.log(vocab_size) + _ENTROPY_SLACK:
            raise InvariantViolation(
                f"entropy {self.entropy} exceeds ln(vocab_size={vocab_size})", record_id
            )

    def to_json(self) -> dict:
        return {
            "token": self.token_text,
            "logprob": self.log_prob,
            "rank": int(self.rank),
            "entropy": self.entropy,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TokenStats":
        return cls(str(obj["token"]), float(obj["logprob"]), obj["rank"], float(obj["entropy"]))


@dataclass(frozen=True)
class TextStats:
    """Per-position statistics for one passage.

    ``scored_from`` is the 1-based position (in the backend's token sequence,
    excluding the begin-of-sequence marker) of the first scored token.
    ``truncated`` counts scored positions dropped by the length cap.
    """

    id: str
    tokens: tuple[TokenStats, ...]
    scored_from: int
    backend_id: str
    vocab_size: int
    truncated: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    def validate(self) -> "TextStats":
        if self.vocab_size < 1:
            raise InvariantViolation(f"vocab_size must be >= 1, got {self.vocab_size}", self.id)
        if self.scored_from < 1:
            raise InvariantViolation(f"scored_from must be >= 1, got {self.scored_from}", self.id)
        for tok in self.tokens:
            tok.check(self.vocab_size, self.id)
        return self

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def log_probs(self) -> list[float]:
        return [t.log_prob for t in self.tokens]

    @property
    def ranks(self) -> list[int]:
        return [int(t.rank) for t in self.tokens]

    @property
    def entropies(self) -> list[float]:
        return [t.entropy for t in self.tokens]

    def to_json(self) -> dict:
        out = {
            "id": self.id,
            "backend_id": self.backend_id,
            "vocab_size": self.vocab_size,
            "scored_from": self.scored_from,
            "tokens": [t.to_json() for t in self.tokens],
        }
        if self.truncated:
            out["truncated"] = self.truncated
        return out


@dataclass(frozen=True)
class DecodingConfig:
    strategy: str = "temperature"
    temperature: float = 1.0
    k: int | None = None
    p: float | None = None
    seed: int = 0
    greedy: bool = False

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown decoding strategy {self.strategy!r}")
        if not self.temperature > 0:
            raise ValueError("temperature must be > 0")
        if self.strategy == "top_k":
            if self.k is None or self.k < 1:
                raise ValueError("top_k decoding needs k >= 1")
        elif self.k is not None:
            raise ValueError(f"k is only used with top_k decoding, not {self.strategy}")
        if self.strategy == "top_p":
            if self.p is None or not 0 < self.p <= 1:
                raise ValueError("top_p decoding needs p in (0, 1]")
        elif self.p is not None:
            raise ValueError(f"p is only used with top_p decoding, not {self.strategy}")

    def to_json(self) -> dict:
        out = {"strategy": self.strategy, "temperature": self.temperature, "seed": self.seed}
        if self.k is not None:
            out["k"] = self.k
        if self.p is not None:
            out["p"] = self.p
        if self.greedy:
            out["greedy"] = True
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "DecodingConfig":
        return cls(
            strategy=obj.get("strategy", "temperature"),
            temperature=float(obj.get("temperature", 1.0)),
            k=obj.get("k"),
            p=obj.get("p"),
            seed=int(obj.get("seed", 0)),
            greedy=bool(obj.get("greedy", False)),
        )


_TOKEN_RE = re.compile(r"\w+(?:'\w+)*|[^\w\s]")
_NO_SPACE_BEFORE = frozenset(".,;:!?)]}")
_NO_SPACE_AFTER = frozenset("([{")


def word_tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def word_detokenize(tokens: Sequence[str]) -> str:
    parts: list[str] = []
    for i, tok in enumerate(tokens):
        if i and tok not in _NO_SPACE_BEFORE and tokens[i - 1] not in _NO_SPACE_AFTER:
            parts.append(" ")
        parts.append(tok)
    return "".join(parts)


class Backend:
    """A causal language model that scores and (optionally) generates text.

    Subclasses provide ``score_positions`` and ``generate``. Backends that
    cannot be shared between threads set ``concurrent_safe = False`` and
    callers go through :meth:`session`.
    """

    backend_id = "backend"
    concurrent_safe = True

    def __init__(self):
        self._lock = threading.Lock()

    @property
    def vocab_size(self) -> int:
        raise NotImplementedError

    def tokenize(self, text: str) -> list[str]:
        raise NotImplementedError

    def detokenize(self, tokens: Sequence[str]) -> str:
        return word_detokenize(tokens)

    def join(self, prompt: str, continuation: str) -> str:
        return self.detokenize(self.tokenize(prompt) + self.tokenize(continuation))

    def score_positions(self, text: str, prompt: str | None = None) -> tuple[list[TokenStats], int]:
        """Return stats for every scored position and the 1-based first position."""
        raise NotImplementedError

    def generate(self, prompt: str, max_tokens: int, cfg: DecodingConfig) -> str:
        raise NotImplementedError

    def session(self):
        if self.concurrent_safe:
            return contextlib.nullcontext()
        return self._lock


def score_text(
    text: str,
    backend: Backend,
    prompt: str | None = None,
    text_id: str = "",
    max_scored: int | None = DEFAULT_MAX_SCORED,
) -> TextStats:
    """Score ``text`` position by position.

    When ``prompt`` is given, ``text`` must start with it; prompt tokens are
    used as context only and excluded from the returned statistics.
    """
    with backend.session():
        tokens, scored_from = backend.score_positions(text, prompt)
    if len(tokens) + scored_from - 1 < 2:
        raise TextTooShort(f"text {text_id!r} has fewer than 2 tokens")
    if not tokens:
        raise TextTooShort(f"text {text_id!r} has no tokens after the prompt")
    truncated = 0
    if max_scored is not None and len(tokens) > max_scored:
        truncated = len(tokens) - max_scored
        tokens = tokens[:max_scored]
    return TextStats(
        id=text_id,
        tokens=tuple(tokens),
        scored_from=scored_from,
        backend_id=backend.backend_id,
        vocab_size=backend.vocab_size,
        truncated=truncated,
    )


def generate(backend: Backend, prompt: str, max_tokens: int, cfg: DecodingConfig) -> str:
    if not prompt or not prompt.strip():
        raise ValueError("prompt must be non-empty")
    if max_tokens < 1:
        raise ValueError("max_tokens must be >= 1")
    with backend.session():
        return backend.generate(prompt, max_tokens, cfg)


def stats_from_distribution(probs: np.ndarray, index: int) -> tuple[float, int, float]:
    """Log-probability, rank and entropy of ``index`` under a full distribution."""
    p = float(probs[index])
    rank = 1 + int(np.count_nonzero(probs > p))
    nz = probs[probs > 0]
    entropy = float(-(nz * np.log(nz)).sum())
    return math.log(p), rank, max(entropy, 0.0)


class DistributionBackend(Backend):
    """Backend over an explicit next-token distribution on a word vocabulary.

    Position 1 is conditioned on a begin-of-sequence marker that is not part
    of the scored text.
    """

    unk = "<unk>"

    def __init__(self, vocab: Sequence[str]):
        super().__init__()
        self.vocab = list(vocab)
        self.index = {w: i for i, w in enumerate(self.vocab)}

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    def tokenize(self, text: str) -> list[str]:
        return word_tokenize(text)

    def encode(self, tokens: Sequence[str]) -> list[int]:
        unk = self.index.get(self.unk, 0)
        return [self.index.get(t, unk) for t in tokens]

    def distribution(self, context: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def position_stats(self, context: Sequence[int], token: int) -> tuple[float, int, float]:
        return stats_from_distribution(self.distribution(context), token)

    def score_positions(self, text, prompt=None):
        words = self.tokenize(text)
        skip = 0
        if prompt is not None:
            prompt_words = self.tokenize(prompt)
            if words[: len(prompt_words)] != prompt_words:
                raise ValueError("text does not start with the given prompt")
            skip = len(prompt_words)
        ids = self.encode(words)
        out = []
        for i in range(skip, len(ids)):
            lp, rank, ent = self.position_stats(ids[:i], ids[i])
            out.append(TokenStats(words[i], lp, rank, ent))
        return out, skip + 1


def decoding_distribution(probs: np.ndarray, cfg: DecodingConfig) -> np.ndarray:
    """Reshape a next-token distribution according to ``cfg`` (renormalised)."""
    probs = np.asarray(probs, dtype=float)
    out = np.zeros_like(probs)
    support = probs > 0
    logp = np.log(probs[support])
    scaled = np.exp((logp - logp.max()) / cfg.temperature)
    out[support] = scaled
    out /= out.sum()
    if cfg.strategy == "top_k":
        order = np.argsort(-out, kind="stable")
        out[order[cfg.k:]] = 0.0
    elif cfg.strategy == "top_p":
        order = np.argsort(-out, kind="stable")
        cum = np.cumsum(out[order])
        keep = min(int(np.searchsorted(cum, cfg.p, side="left")) + 1, len(order))
        out[order[keep:]] = 0.0
    return out / out.sum()


def pick_token(probs: np.ndarray, cfg: DecodingConfig, rng: np.random.Generator) -> int:
    if cfg.greedy:
        return int(np.argmax(probs))
    dist = decoding_distribution(probs, cfg)
    return int(rng.choice(len(dist), p=dist))
