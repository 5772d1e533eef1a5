from detectllm.backend.base import (
    DEFAULT_MAX_SCORED,
    Backend,
    DecodingConfig,
    DistributionBackend,
    TextStats,
    TokenStats,
    decoding_distribution,
    generate,
    score_text,
    stats_from_distribution,
    word_detokenize,
    word_tokenize,
)
from detectllm.backend.http import HttpBackend
from detectllm.backend.offline import OfflineStats, dump_stats, load_offline_stats
from detectllm.backend.toy import ToyModel, train_toy_lm

__all__ = [
    "DEFAULT_MAX_SCORED",
    "Backend",
    "DecodingConfig",
    "DistributionBackend",
    "HttpBackend",
    "OfflineStats",
    "TextStats",
    "TokenStats",
    "ToyModel",
    "decoding_distribution",
    "dump_stats",
    "generate",
    "load_offline_stats",
    "score_text",
    "stats_from_distribution",
    "train_toy_lm",
    "word_detokenize",
    "word_tokenize",
]
