"""Stats-JSONL reading and writing.

One JSON object per line::

    {"id": str, "backend_id": str, "vocab_size": int, "scored_from": int,
     "tokens": [{"token": str, "logprob": float, "rank": int, "entropy": float}, ...]}
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from detectllm.backend.base import TextStats, TokenStats
from detectllm.errors import InvariantViolation, ParseError, VocabMismatch


def parse_stats_record(obj: dict) -> TextStats:
    tokens = tuple(TokenStats.from_json(t) for t in obj["tokens"])
    return TextStats(
        id=str(obj["id"]),
        tokens=tokens,
        scored_from=int(obj.get("scored_from", 1)),
        backend_id=str(obj.get("backend_id", "offline")),
        vocab_size=int(obj["vocab_size"]),
        truncated=int(obj.get("truncated", 0)),
    )


def load_offline_stats(path, vocab_size: int | None = None) -> Iterator[TextStats]:
    """Yield validated TextStats in file order.

    ``vocab_size``, when given, must match every record. Records sharing a
    backend_id must also agree with each other.
    """
    seen_vocab: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(lineno, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise ParseError(lineno, "record is not a JSON object")
            try:
                stats = parse_stats_record(obj)
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(lineno, f"bad or missing field: {exc}") from exc
            stats.validate()
            if not stats.tokens:
                raise InvariantViolation("tokens must be non-empty", stats.id)
            if vocab_size is not None and stats.vocab_size != vocab_size:
                raise VocabMismatch(
                    f"record {stats.id!r} has vocab_size {stats.vocab_size}, expected {vocab_size}"
                )
            prev = seen_vocab.setdefault(stats.backend_id, stats.vocab_size)
            if prev != stats.vocab_size:
                raise VocabMismatch(
                    f"record {stats.id!r} has vocab_size {stats.vocab_size}, "
                    f"earlier records from {stats.backend_id!r} had {prev}"
                )
            yield stats


def dump_stats(records: Iterable[TextStats], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")


class OfflineStats:
    """Pre-computed statistics addressed by record id."""

    def __init__(self, path, perturbed_path=None, vocab_size: int | None = None):
        self.path = Path(path)
        self.records = {s.id: s for s in load_offline_stats(path, vocab_size)}
        self.perturbed: dict[str, list[TextStats]] = {}
        if perturbed_path is not None:
            for s in load_offline_stats(perturbed_path, vocab_size):
                self.perturbed.setdefault(perturbed_parent(s.id), []).append(s)

    def get(self, record_id: str) -> TextStats:
        try:
            return self.records[record_id]
        except KeyError:
            raise KeyError(f"no stats record with id {record_id!r} in {self.path}") from None

    def perturbations_of(self, record_id: str) -> list[TextStats]:
        return self.perturbed.get(record_id, [])


def perturbed_parent(record_id: str) -> str:
    """Perturbed records are named ``<parent id>#<k>``."""
    return record_id.rsplit("#", 1)[0]
