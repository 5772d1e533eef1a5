from detectllm.evaluation.auroc import auroc, auroc_pairwise
from detectllm.evaluation.benchmark import BenchmarkReport, recommend_method, run_benchmark
from detectllm.evaluation.cost import CostModel, cost_table, estimate_cost

__all__ = [
    "BenchmarkReport",
    "CostModel",
    "auroc",
    "auroc_pairwise",
    "cost_table",
    "estimate_cost",
    "recommend_method",
    "run_benchmark",
]
