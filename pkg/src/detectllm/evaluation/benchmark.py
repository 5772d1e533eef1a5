"""Benchmark orchestration over paired human/machine datasets."""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from detectllm.backend.base import DEFAULT_MAX_SCORED, Backend, TextStats, score_text
from detectllm.datagen import PairedSample
from detectllm.detectors import METHODS, PERTURBATION_METHODS, canonical_method, run_detector
from detectllm.errors import DetectLLMError, InputError, MissingMethod
from detectllm.evaluation.auroc import auroc
from detectllm.perturber import PerturbationConfig, perturb

log = logging.getLogger(__name__)

ADVISORY_N = 10


@dataclass
class BenchmarkReport:
    dataset_id: str
    backend_id: str
    methods: list[str]
    auroc: dict[str, float]
    config: dict
    n_pairs: int
    failures: list[dict] = field(default_factory=list)
    # method -> (machine scores, human scores), aligned with ``ids``
    scores: dict[str, tuple[list[float], list[float]]] = field(default_factory=dict)
    ids: list[str] = field(default_factory=list)
    degenerate: dict[str, int] = field(default_factory=dict)
    timing: dict | None = None

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    @property
    def advisory(self) -> dict | None:
        if not {"lrr", "npr"} <= set(self.methods):
            return None
        n = (self.config.get("perturbation") or {}).get("n")
        if n != ADVISORY_N:
            return {"n_perturbations": n, "rule_applies": False, "recommended": None}
        return {"n_perturbations": n, "rule_applies": True, "recommended": recommend_method(self)}

    def to_json(self) -> dict:
        out = {
            "dataset_id": self.dataset_id,
            "backend_id": self.backend_id,
            "methods": self.methods,
            "auroc": {m: self.auroc[m] for m in self.methods},
            "degenerate_counts": {m: self.degenerate.get(m, 0) for m in self.methods},
            "config": self.config,
            "n_pairs": self.n_pairs,
            "n_used": self.n_pairs - self.n_failed,
            "n_failed": self.n_failed,
            "failures": self.failures,
            "advisory": self.advisory,
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def table(self) -> str:
        col = self.backend_id
        width = max(len("Method"), *(len(m) for m in self.methods))
        lines = [
            f"{'Method':<{width}}  {col}",
            f"{'-' * width}  {'-' * len(col)}",
        ]
        for m in self.methods:
            lines.append(f"{m:<{width}}  {100 * self.auroc[m]:.2f}")
        lines.append(f"(AUROC x100 on {self.dataset_id}, {self.n_pairs - self.n_failed} pairs)")
        adv = self.advisory
        if adv and adv["rule_applies"]:
            lines.append(f"advisory at n={ADVISORY_N}: use {adv['recommended']}")
        return "\n".join(lines) + "\n"

    def scores_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "label", *self.methods])
        for label, side in (("machine", 0), ("human", 1)):
            for i, pid in enumerate(self.ids):
                writer.writerow([pid, label, *(repr(self.scores[m][side][i]) for m in self.methods)])
        return buf.getvalue()

    def write(self, out_dir, prefix: str = "report") -> dict[str, Path]:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "json": out_dir / f"{prefix}.json",
            "table": out_dir / f"{prefix}.txt",
            "csv": out_dir / f"{prefix}_scores.csv",
        }
        paths["json"].write_text(self.dumps(), encoding="utf-8")
        paths["table"].write_text(self.table(), encoding="utf-8")
        paths["csv"].write_text(self.scores_csv(), encoding="utf-8")
        return paths


def recommend_method(report: BenchmarkReport) -> str:
    """LRR unless NPR has strictly higher AUROC at 10 perturbations."""
    for m in ("lrr", "npr"):
        if m not in report.auroc:
            raise MissingMethod(f"report has no AUROC for {m}")
    n = (report.config.get("perturbation") or {}).get("n")
    if n != ADVISORY_N:
        raise InputError(f"the LRR/NPR rule is defined at n={ADVISORY_N} perturbations, report used n={n}")
    return "lrr" if report.auroc["lrr"] >= report.auroc["npr"] else "npr"


@dataclass
class _SideResult:
    scores: dict[str, object]
    t_score: float
    t_perturb: list[float]
    t_pscore: list[float]


def _split_prompt(text: str, prompt: str) -> str:
    if not text.startswith(prompt):
        raise InputError("text does not start with its prompt")
    return text[len(prompt):]


def _score_side(text, prompt, tag, backend, perturb_backend, methods, pcfg, score_prompt,
                normalize, max_scored) -> _SideResult:
    ctx = None if score_prompt else prompt
    t0 = time.perf_counter()
    stats = score_text(text, backend, prompt=ctx, text_id=tag, max_scored=max_scored)
    t_score = time.perf_counter() - t0

    perturbed: list[TextStats] = []
    t_perturb: list[float] = []
    t_pscore: list[float] = []
    if PERTURBATION_METHODS & set(methods):
        body = text if score_prompt else _split_prompt(text, prompt)
        t0 = time.perf_counter()
        pset = perturb(body, pcfg, backend=perturb_backend, text_id=tag)
        t_perturb = [(time.perf_counter() - t0) / len(pset)] * len(pset)
        for k, variant in enumerate(pset.variants):
            full = variant if score_prompt else backend.join(prompt, variant)
            t0 = time.perf_counter()
            perturbed.append(score_text(full, backend, prompt=ctx, text_id=f"{tag}#{k}", max_scored=max_scored))
            t_pscore.append(time.perf_counter() - t0)

    scores = {}
    for m in methods:
        t0 = time.perf_counter()
        scores[m] = (run_detector(m, stats, perturbed, normalize=normalize), time.perf_counter() - t0)
    return _SideResult(scores, t_score, t_perturb, t_pscore)


def run_benchmark(
    pairs: Sequence[PairedSample],
    methods: Iterable[str],
    backend: Backend,
    perturber_cfg: PerturbationConfig | None = None,
    perturb_backend=None,
    workers: int = 1,
    score_prompt: bool = False,
    normalize_detect_gpt: bool = False,
    max_scored: int | None = DEFAULT_MAX_SCORED,
    dataset_id: str = "dataset",
    record_timing: bool = False,
) -> BenchmarkReport:
    """Score every pair with every method and compute per-method AUROC.

    Perturbation sets are drawn once per text and shared by DetectGPT and NPR.
    A pair is dropped (both sides) when either side fails; failures are
    counted in the report.
    """
    if not pairs:
        raise InputError("benchmark needs at least one pair")
    chosen = sorted({canonical_method(m) for m in methods}, key=METHODS.index)
    if not chosen:
        raise InputError("no methods selected")
    if PERTURBATION_METHODS & set(chosen) and perturber_cfg is None:
        raise InputError("perturbation-based methods need a perturbation config")

    def one(pair: PairedSample):
        try:
            machine = _score_side(pair.machine_text, pair.prompt, f"{pair.id}:machine", backend,
                                  perturb_backend, chosen, perturber_cfg, score_prompt,
                                  normalize_detect_gpt, max_scored)
            human = _score_side(pair.human_text, pair.prompt, f"{pair.id}:human", backend,
                                perturb_backend, chosen, perturber_cfg, score_prompt,
                                normalize_detect_gpt, max_scored)
        except DetectLLMError as exc:
            log.warning("dropping pair %s: %s", pair.id, exc)
            return pair.id, None, f"{type(exc).__name__}: {exc}"
        return pair.id, (machine, human), None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    scores = {m: ([], []) for m in chosen}
    degenerate = defaultdict(int)
    ids, failures = [], []
    t_m, t_p = [], []
    method_time = defaultdict(float)
    for pid, res, err in results:
        if res is None:
            failures.append({"id": pid, "reason": err})
            continue
        ids.append(pid)
        for side_idx, side in enumerate(res):
            t_m.append(side.t_score)
            t_m.extend(side.t_pscore)
            t_p.extend(side.t_perturb)
            for m in chosen:
                score, dt = side.scores[m]
                scores[m][side_idx].append(score.value)
                degenerate[m] += score.degenerate
                method_time[m] += dt + side.t_score
                if m in PERTURBATION_METHODS:
                    method_time[m] += sum(side.t_perturb) + sum(side.t_pscore)
    if not ids:
        raise InputError(f"all {len(pairs)} pairs failed; first error: {failures[0]['reason']}")

    config = {
        "perturbation": perturber_cfg.to_json() if perturber_cfg and PERTURBATION_METHODS & set(chosen) else None,
        "decoding": _shared_decoding(pairs),
        "score_prompt": score_prompt,
        "normalize_detect_gpt": normalize_detect_gpt,
        "max_scored": max_scored,
    }
    timing = None
    if record_timing:
        n_texts = 2 * len(ids)
        timing = {
            "per_method_seconds": {m: method_time[m] / n_texts for m in chosen},
            "t_m": sum(t_m) / len(t_m),
            "t_p": sum(t_p) / len(t_p) if t_p else None,
        }
    return BenchmarkReport(
        dataset_id=dataset_id,
        backend_id=backend.backend_id,
        methods=chosen,
        auroc={m: auroc(*scores[m]) for m in chosen},
        config=config,
        n_pairs=len(pairs),
        failures=failures,
        scores=scores,
        ids=ids,
        degenerate=dict(degenerate),
        timing=timing,
    )


def _shared_decoding(pairs: Sequence[PairedSample]):
    cfgs = {json.dumps(p.decoding.to_json() if p.decoding else None, sort_keys=True) for p in pairs}
    if len(cfgs) == 1:
        return json.loads(cfgs.pop())
    return "mixed"
