"""Paired human/machine dataset construction.

Each selected human text is cut to its first ``prompt_tokens`` backend tokens,
the generation backend continues that prompt, and both texts are trimmed to the
same continuation length.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from detectllm.backend.base import Backend, DecodingConfig, generate
from detectllm.errors import InsufficientCorpus, ParseError

log = logging.getLogger(__name__)

MAX_RESAMPLES = 3


@dataclass(frozen=True)
class PairedSample:
    id: str
    human_text: str
    machine_text: str
    prompt: str
    decoding: DecodingConfig | None = None
    backend_id: str = ""

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "human_text": self.human_text,
            "machine_text": self.machine_text,
            "prompt": self.prompt,
            "decoding": self.decoding.to_json() if self.decoding else None,
            "backend_id": self.backend_id,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PairedSample":
        dec = obj.get("decoding")
        return cls(
            id=str(obj["id"]),
            human_text=obj["human_text"],
            machine_text=obj["machine_text"],
            prompt=obj.get("prompt", ""),
            decoding=DecodingConfig.from_json(dec) if dec else None,
            backend_id=obj.get("backend_id", ""),
        )


@dataclass
class Dataset:
    pairs: list[PairedSample]
    metadata: dict


def normalize_text(text: str) -> str:
    return " ".join(unicodedata.normalize("NFC", text).split())


def is_degenerate(tokens: Sequence[str]) -> bool:
    """Empty, or nothing but a repeated block (period at most half the length)."""
    n = len(tokens)
    if n == 0:
        return True
    for period in range(1, n // 2 + 1):
        if all(tokens[i] == tokens[i - period] for i in range(period, n)):
            return True
    return False


def _pair_seed(seed: int, index: int, attempt: int) -> int:
    return int(np.random.SeedSequence([seed, index, attempt]).generate_state(1)[0])


def build_dataset(
    human_texts: Sequence[str],
    backend: Backend,
    cfg: DecodingConfig,
    prompt_tokens: int = 30,
    n_pairs: int = 300,
    min_len: int = 50,
    max_new_tokens: int = 100,
    seed: int = 0,
    workers: int = 1,
    source: str = "",
) -> Dataset:
    if prompt_tokens < 1 or min_len < 1 or n_pairs < 1:
        raise ValueError("prompt_tokens, min_len and n_pairs must be >= 1")
    if max_new_tokens < min_len:
        raise ValueError("max_new_tokens must be >= min_len")

    texts = [normalize_text(t) for t in human_texts]
    tokenized = [backend.tokenize(t) for t in texts]
    eligible = [i for i, toks in enumerate(tokenized) if len(toks) >= prompt_tokens + min_len]
    skipped = {"too_short": len(texts) - len(eligible), "degenerate": 0, "identical": 0}
    if len(eligible) < n_pairs:
        raise InsufficientCorpus(
            f"only {len(eligible)} texts have >= {prompt_tokens + min_len} tokens; {n_pairs} pairs requested"
        )
    order = [eligible[j] for j in np.random.default_rng(seed).permutation(len(eligible))]

    def attempt(i: int):
        toks = tokenized[i]
        prompt = backend.detokenize(toks[:prompt_tokens])
        human_rest = toks[prompt_tokens:]
        for a in range(MAX_RESAMPLES + 1):
            run_cfg = dataclasses.replace(cfg, seed=_pair_seed(seed, i, a))
            cont = backend.tokenize(generate(backend, prompt, max_new_tokens, run_cfg))
            if len(cont) < min_len or is_degenerate(cont):
                continue
            length = min(len(cont), len(human_rest))
            if cont[:length] == human_rest[:length]:
                return i, None, "identical"
            human = backend.detokenize(toks[:prompt_tokens + length])
            machine = backend.join(prompt, backend.detokenize(cont[:length]))
            return i, (prompt, human, machine), None
        return i, None, "degenerate"

    accepted: dict[int, tuple[str, str, str]] = {}
    pos = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(accepted) < n_pairs and pos < len(order):
            batch = order[pos:pos + n_pairs - len(accepted)]
            pos += len(batch)
            results = pool.map(attempt, batch) if pool else map(attempt, batch)
            for i, res, why in results:
                if res is None:
                    skipped[why] += 1
                    log.info("skipping text %d: %s continuation", i, why)
                else:
                    accepted[i] = res
    finally:
        if pool:
            pool.shutdown()
    if len(accepted) < n_pairs:
        raise InsufficientCorpus(
            f"only {len(accepted)} usable pairs after skipping {skipped}; {n_pairs} requested"
        )

    pairs = [
        PairedSample(
            id=f"pair-{i:05d}",
            human_text=accepted[i][1],
            machine_text=accepted[i][2],
            prompt=accepted[i][0],
            decoding=cfg,
            backend_id=backend.backend_id,
        )
        for i in sorted(accepted)
    ]
    metadata = {
        "corpus_source": source,
        "n_input_texts": len(texts),
        "n_eligible": len(eligible),
        "n_pairs": len(pairs),
        "prompt_tokens": prompt_tokens,
        "min_len": min_len,
        "max_new_tokens": max_new_tokens,
        "decoding": cfg.to_json(),
        "seed": seed,
        "backend_id": backend.backend_id,
        "normalization": "unicode NFC, whitespace collapsed",
        "length_matching": "human and machine continuations trimmed to the shorter one",
        "skipped": skipped,
    }
    return Dataset(pairs, metadata)


def build_pairs(human_texts, backend, cfg, prompt_tokens=30, n_pairs=300, min_len=50,
                seed=0, **kwargs) -> list[PairedSample]:
    return build_dataset(human_texts, backend, cfg, prompt_tokens=prompt_tokens, n_pairs=n_pairs,
                         min_len=min_len, seed=seed, **kwargs).pairs


def metadata_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def write_dataset(ds: Dataset, path) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for p in ds.pairs:
            fh.write(json.dumps(p.to_json(), sort_keys=True) + "\n")
    metadata_path(path).write_text(json.dumps(ds.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_dataset(path) -> list[PairedSample]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                pairs.append(PairedSample.from_json(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ParseError(lineno, f"bad dataset record: {exc}") from exc
    return pairs
