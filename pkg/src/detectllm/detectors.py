"""Zero-shot detection statistics.

Every detector returns a :class:`DetectorScore` oriented so that a higher value
means "more likely machine-generated". Rank-based statistics are negated here
to keep that single orientation.

Means are taken about the first element so that a constant list averages to
exactly that constant: identity perturbation sets give NPR = 1.0 and
DetectGPT = 0.0 with no rounding residue.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Callable, Sequence

from detectllm.backend.base import TextStats
from detectllm.errors import EmptyStats, InvariantViolation, NoPerturbations

EPS = 1e-6
DEGENERATE_MAX = 1e9

METHODS = ("log_p", "rank", "log_rank", "entropy", "lrr", "detect_gpt", "npr")
PERTURBATION_METHODS = frozenset({"detect_gpt", "npr"})

_ALIASES = {
    "logp": "log_p",
    "log_likelihood": "log_p",
    "logrank": "log_rank",
    "detectgpt": "detect_gpt",
}


def canonical_method(name: str) -> str:
    key = name.strip().lower().replace("-", "_")
    key = _ALIASES.get(key, key)
    if key not in METHODS:
        raise ValueError(f"unknown method {name!r}; choose from {', '.join(METHODS)}")
    return key


@dataclass(frozen=True)
class DetectorScore:
    method: str
    value: float
    degenerate: bool = False
    n_perturbations_used: int = 0
    orientation: str = "higher => machine"

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "score": self.value,
            "degenerate": self.degenerate,
            "n_perturbations": self.n_perturbations_used,
        }


def _require(s: TextStats) -> None:
    if not s.tokens:
        raise EmptyStats(f"text {s.id!r} has no scored tokens")


def _require_perturbed(perturbed: Sequence[TextStats]) -> None:
    if not perturbed:
        raise NoPerturbations("perturbation-based detectors need at least one perturbed text")
    for p in perturbed:
        _require(p)


def _mean(values: Sequence[float]) -> float:
    first = values[0]
    return first + math.fsum(v - first for v in values) / len(values)


def mean_log_prob(s: TextStats) -> float:
    return _mean(s.log_probs)


def mean_log_rank(s: TextStats) -> float:
    return _mean([math.log(r) for r in s.ranks])


def log_p_score(s: TextStats) -> DetectorScore:
    _require(s)
    return DetectorScore("log_p", mean_log_prob(s))


def rank_score(s: TextStats) -> DetectorScore:
    _require(s)
    return DetectorScore("rank", -_mean([float(r) for r in s.ranks]))


def log_rank_score(s: TextStats) -> DetectorScore:
    _require(s)
    return DetectorScore("log_rank", -mean_log_rank(s))


def entropy_score(s: TextStats) -> DetectorScore:
    _require(s)
    return DetectorScore("entropy", _mean(s.entropies))


def lrr(s: TextStats) -> DetectorScore:
    """Log-likelihood / log-rank ratio, ``-sum(log p) / sum(log r)``."""
    _require(s)
    total_logp = math.fsum(s.log_probs)
    total_logr = math.fsum(math.log(r) for r in s.ranks)
    if total_logp > 0 or total_logr < 0:
        raise InvariantViolation(
            f"LRR needs sum(log p) <= 0 and sum(log r) >= 0, got {total_logp}, {total_logr}", s.id
        )
    if total_logr < EPS:
        return DetectorScore("lrr", DEGENERATE_MAX, degenerate=True)
    return DetectorScore("lrr", -total_logp / total_logr)


def detect_gpt(s: TextStats, perturbed: Sequence[TextStats], normalize: bool = False) -> DetectorScore:
    _require(s)
    _require_perturbed(perturbed)
    pert = [mean_log_prob(p) for p in perturbed]
    diff = mean_log_prob(s) - _mean(pert)
    n = len(perturbed)
    if not normalize:
        return DetectorScore("detect_gpt", diff, n_perturbations_used=n)
    std = statistics.stdev(pert) if n > 1 else 0.0
    if std < EPS:
        value = math.copysign(DEGENERATE_MAX, diff) if diff else 0.0
        return DetectorScore("detect_gpt", value, degenerate=True, n_perturbations_used=n)
    return DetectorScore("detect_gpt", diff / std, n_perturbations_used=n)


def npr(s: TextStats, perturbed: Sequence[TextStats]) -> DetectorScore:
    """Mean perturbed log-rank over the original's log-rank (per-token means)."""
    _require(s)
    _require_perturbed(perturbed)
    n = len(perturbed)
    base = mean_log_rank(s)
    if base < EPS:
        return DetectorScore("npr", DEGENERATE_MAX, degenerate=True, n_perturbations_used=n)
    return DetectorScore("npr", _mean([mean_log_rank(p) for p in perturbed]) / base,
                         n_perturbations_used=n)


SIMPLE_DETECTORS: dict[str, Callable[[TextStats], DetectorScore]] = {
    "log_p": log_p_score,
    "rank": rank_score,
    "log_rank": log_rank_score,
    "entropy": entropy_score,
    "lrr": lrr,
}


def run_detector(method: str, s: TextStats, perturbed: Sequence[TextStats] | None = None,
                 normalize: bool = False) -> DetectorScore:
    method = canonical_method(method)
    if method in SIMPLE_DETECTORS:
        return SIMPLE_DETECTORS[method](s)
    if method == "npr":
        return npr(s, perturbed or [])
    return detect_gpt(s, perturbed or [], normalize=normalize)
