import math
import random

import pytest

from detectllm.backend import DecodingConfig, TextStats, TokenStats, train_toy_lm
from detectllm.backend.server import serve
from detectllm.corpus import fixture_sentences, toy_corpus_split
from detectllm.datagen import build_pairs


def make_stats(log_probs=None, ranks=None, entropies=None, vocab_size=50_000, text_id="t"):
    n = len(log_probs if log_probs is not None else ranks if ranks is not None else entropies)
    log_probs = log_probs if log_probs is not None else [-1.0] * n
    ranks = ranks if ranks is not None else [1] * n
    entropies = entropies if entropies is not None else [0.0] * n
    toks = tuple(TokenStats(f"w{i}", lp, r, e) for i, (lp, r, e) in enumerate(zip(log_probs, ranks, entropies)))
    return TextStats(text_id, toks, 1, "test", vocab_size)


def random_stats(rng: random.Random, vocab_size=50_000, max_len=60, text_id="r"):
    n = rng.randint(1, max_len)
    lps = [-rng.uniform(0, 12) for _ in range(n)]
    ranks = [1 if rng.random() < 0.3 else rng.randint(1, 2000) for _ in range(n)]
    ents = [rng.uniform(0, math.log(vocab_size)) for _ in range(n)]
    return make_stats(lps, ranks, ents, vocab_size, text_id)


@pytest.fixture(scope="session")
def fixture_model():
    return train_toy_lm(fixture_sentences(), order=3, alpha=0.1)


@pytest.fixture(scope="session")
def toy_split():
    return toy_corpus_split(800, 300, seed=0)


@pytest.fixture(scope="session")
def toy_model(toy_split):
    return train_toy_lm(toy_split[0], order=3, alpha=0.01)


@pytest.fixture(scope="session")
def toy_pairs(toy_split, toy_model):
    return build_pairs(toy_split[1], toy_model, DecodingConfig(temperature=1.0, seed=1), n_pairs=40)


@pytest.fixture(scope="session")
def toy_server(fixture_model):
    server = serve(fixture_model)
    host, port = server.server_address[:2]
    yield f"http://{host}:{port}"
    server.shutdown()
