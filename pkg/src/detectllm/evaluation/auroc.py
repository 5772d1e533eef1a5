"""Threshold-free AUROC via the rank-sum (Mann-Whitney) statistic."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from detectllm.errors import EmptyScoreList


def midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with tied values sharing the mean of their positions."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def auroc(machine_scores: Sequence[float], human_scores: Sequence[float]) -> float:
    """P(machine score > human score) + 0.5 * P(tie)."""
    m = np.asarray(machine_scores, dtype=float)
    h = np.asarray(human_scores, dtype=float)
    if m.size == 0 or h.size == 0:
        raise EmptyScoreList("auroc needs non-empty machine and human score lists")
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(h))):
        raise ValueError("scores must be finite")
    ranks = midranks(np.concatenate([m, h]))
    u = ranks[: m.size].sum() - m.size * (m.size + 1) / 2
    return float(u / (m.size * h.size))


def auroc_pairwise(machine_scores: Sequence[float], human_scores: Sequence[float]) -> float:
    """Exhaustive O(|M||H|) reference count."""
    if len(machine_scores) == 0 or len(human_scores) == 0:
        raise EmptyScoreList("auroc needs non-empty machine and human score lists")
    wins = sum(1.0 if a > b else 0.5 if a == b else 0.0 for a in machine_scores for b in human_scores)
    return wins / (len(machine_scores) * len(human_scores))
