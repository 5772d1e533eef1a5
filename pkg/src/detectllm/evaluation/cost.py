"""Per-sample runtime model for the detectors.

With ``t_p`` the time to produce one perturbation, ``t_m`` the time to score
one text with the language model and ``n`` perturbations:

* log_p, rank, log_rank, entropy: ``t_m``
* lrr: ``2 * t_m`` (needs both log-likelihood and log-rank)
* detect_gpt, npr: ``n * t_p + (n + 1) * t_m``
"""

from __future__ import annotations

from dataclasses import dataclass

from detectllm.detectors import PERTURBATION_METHODS, canonical_method


@dataclass(frozen=True)
class CostModel:
    t_p: float
    t_m: float
    n: int = 0

    def __post_init__(self):
        if not (self.t_p > 0 and self.t_m > 0):
            raise ValueError("t_p and t_m must be positive")
        if self.n < 0:
            raise ValueError("n must be >= 0")


def estimate_cost(method: str, cm: CostModel) -> float:
    method = canonical_method(method)
    if method in PERTURBATION_METHODS:
        return cm.n * cm.t_p + (cm.n + 1) * cm.t_m
    if method == "lrr":
        return 2 * cm.t_m
    return cm.t_m


# Seconds, measured per sample: perturbation models and scoring models.
PERTURBATION_TIMES = {"T5-3b": 0.10, "T5-large": 0.08, "T5-base": 0.04, "T5-small": 0.03}
SCORING_TIMES = {
    "GPT2-xl": 0.06,
    "Neo-2.7": 0.09,
    "OPT-2.7": 0.10,
    "GPT-j": 0.04,
    "OPT-13": 0.07,
    "Llama-13": 0.07,
    "NeoX": 0.60,
}

# Measured wall-clock per method and scoring model (T5-3b, 50 perturbations).
MEASURED_TIMES = {
    "log_p": [0.06, 0.09, 0.10, 0.04, 0.07, 0.07, 0.60],
    "rank": [0.07, 0.10, 0.09, 0.04, 0.05, 0.07, 0.60],
    "log_rank": [0.06, 0.09, 0.10, 0.04, 0.05, 0.06, 0.60],
    "entropy": [0.06, 0.09, 0.09, 0.04, 0.05, 0.06, 0.60],
    "lrr": [0.12, 0.19, 0.18, 0.08, 0.10, 0.14, 1.20],
    "detect_gpt": [8.07, 9.60, 9.80, 7.03, 7.98, 8.14, 35.56],
    "npr": [8.15, 9.69, 9.90, 7.12, 7.83, 7.98, 35.67],
}


def cost_table(t_p: float = PERTURBATION_TIMES["T5-3b"], n: int = 50) -> dict[str, dict[str, float]]:
    """Predicted per-sample seconds for every method and scoring model."""
    return {
        method: {
            model: estimate_cost(method, CostModel(t_p=t_p, t_m=t_m, n=n))
            for model, t_m in SCORING_TIMES.items()
        }
        for method in MEASURED_TIMES
    }


def calibrate(perturb_seconds: list[float], score_seconds: list[float], n: int) -> CostModel:
    """Fit ``t_p`` and ``t_m`` as the mean of measured per-call timings."""
    if not perturb_seconds or not score_seconds:
        raise ValueError("need at least one perturbation and one scoring timing")
    t_p = sum(perturb_seconds) / len(perturb_seconds)
    t_m = sum(score_seconds) / len(score_seconds)
    return CostModel(t_p=max(t_p, 1e-12), t_m=max(t_m, 1e-12), n=n)
