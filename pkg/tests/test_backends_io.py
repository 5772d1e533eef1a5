import json
import socket

import pytest

from detectllm.backend import (
    DecodingConfig,
    HttpBackend,
    OfflineStats,
    TokenStats,
    dump_stats,
    generate,
    load_offline_stats,
    score_text,
)
from detectllm.backend.http import ENV_URL
from detectllm.corpus import fixture_sentences
from detectllm.errors import (
    BackendUnavailable,
    InvariantViolation,
    ParseError,
    UnsupportedStrategy,
    VocabMismatch,
)

from conftest import make_stats


def _record(rid, tokens, vocab=100, backend="b"):
    return {"id": rid, "backend_id": backend, "vocab_size": vocab, "scored_from": 1, "tokens": tokens}


def _tok(lp=-1.0, rank=1, ent=0.5, text="w"):
    return {"token": text, "logprob": lp, "rank": rank, "entropy": ent}


def _write(path, objs):
    path.write_text("".join(json.dumps(o) + "\n" for o in objs))
    return path


# -- records -------------------------------------------------------------------

@pytest.mark.parametrize(
    "tok",
    [
        TokenStats("x", 0.1, 1, 0.0),
        TokenStats("x", float("nan"), 1, 0.0),
        TokenStats("x", -1.0, 0, 0.0),
        TokenStats("x", -1.0, 1.5, 0.0),
        TokenStats("x", -1.0, 1, -0.1),
    ],
)
def test_token_invariants(tok):
    with pytest.raises(InvariantViolation):
        tok.check()


def test_entropy_bounded_by_vocab():
    with pytest.raises(InvariantViolation):
        TokenStats("x", -1.0, 1, 3.0).check(vocab_size=10)
    TokenStats("x", -1.0, 1, 2.3).check(vocab_size=10)


# -- offline ---------------------------------------------------------------

def test_offline_rank_zero_names_record(tmp_path):
    path = _write(tmp_path / "s.jsonl", [_record("ok", [_tok()]), _record("bad-7", [_tok(rank=0)])])
    it = load_offline_stats(path)
    assert next(it).id == "ok"
    with pytest.raises(InvariantViolation) as err:
        next(it)
    assert err.value.record_id == "bad-7"
    assert "bad-7" in str(err.value)


def test_offline_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert list(load_offline_stats(path)) == []


def test_offline_roundtrip(tmp_path):
    recs = [make_stats([-1.5, -0.25], [3, 1], [0.7, 0.1], vocab_size=100, text_id=f"r{i}") for i in range(3)]
    dump_stats(recs, tmp_path / "s.jsonl")
    assert list(load_offline_stats(tmp_path / "s.jsonl")) == recs


def test_offline_parse_error_line(tmp_path):
    path = tmp_path / "s.jsonl"
    path.write_text(json.dumps(_record("a", [_tok()])) + "\n{not json\n")
    with pytest.raises(ParseError) as err:
        list(load_offline_stats(path))
    assert err.value.line == 2


def test_offline_missing_field(tmp_path):
    path = _write(tmp_path / "s.jsonl", [{"id": "a", "tokens": [_tok()]}])
    with pytest.raises(ParseError):
        list(load_offline_stats(path))


def test_offline_vocab_mismatch(tmp_path):
    path = _write(tmp_path / "s.jsonl", [_record("a", [_tok()], vocab=100), _record("b", [_tok()], vocab=200)])
    with pytest.raises(VocabMismatch):
        list(load_offline_stats(path))
    ok = _write(tmp_path / "t.jsonl", [_record("a", [_tok()], vocab=100)])
    with pytest.raises(VocabMismatch):
        list(load_offline_stats(ok, vocab_size=50))


def test_offline_perturbed_lookup(tmp_path):
    _write(tmp_path / "o.jsonl", [_record("x", [_tok()])])
    _write(tmp_path / "p.jsonl", [_record(f"x#{k}", [_tok(lp=-2.0)]) for k in range(3)])
    store = OfflineStats(tmp_path / "o.jsonl", tmp_path / "p.jsonl")
    assert store.get("x").id == "x"
    assert [s.id for s in store.perturbations_of("x")] == ["x#0", "x#1", "x#2"]
    assert store.perturbations_of("y") == []
    with pytest.raises(KeyError):
        store.get("y")


# -- http --------------------------------------------------------------------

def _dead_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_http_matches_local_model(toy_server, fixture_model):
    backend = HttpBackend(toy_server)
    text = fixture_sentences()[5]
    remote = score_text(text, backend)
    local = score_text(text, fixture_model)
    assert backend.vocab_size == fixture_model.vocab_size
    assert remote.log_probs == pytest.approx(local.log_probs, abs=1e-12)
    assert remote.ranks == local.ranks
    assert "".join(t.token_text for t in remote.tokens) == text


def test_http_prompt_exclusion(toy_server, fixture_model):
    backend = HttpBackend(toy_server)
    text = fixture_sentences()[5]
    prompt = " ".join(text.split()[:4])
    remote = score_text(text, backend, prompt=prompt)
    local = score_text(text, fixture_model, prompt=prompt)
    assert remote.ranks == local.ranks
    assert remote.scored_from == local.scored_from


def test_http_generate_and_perturb(toy_server):
    backend = HttpBackend(toy_server)
    cfg = DecodingConfig(strategy="top_k", k=5, seed=3)
    a = generate(backend, "The old man", 12, cfg)
    assert a and a == generate(backend, "The old man", 12, cfg)
    variants = backend.perturb(fixture_sentences()[0] + " " + fixture_sentences()[1], 3, 0.15, 2, 0)
    assert len(variants) == 3


def test_http_greedy_unsupported(toy_server):
    with pytest.raises(UnsupportedStrategy):
        generate(HttpBackend(toy_server), "The", 5, DecodingConfig(greedy=True))


def test_http_unreachable():
    backend = HttpBackend(f"http://127.0.0.1:{_dead_port()}", timeout=2)
    with pytest.raises(BackendUnavailable):
        score_text("a b c", backend)


def test_http_url_from_environment(monkeypatch, toy_server):
    monkeypatch.setenv(ENV_URL, toy_server)
    assert HttpBackend().url == toy_server
    monkeypatch.delenv(ENV_URL)
    with pytest.raises(BackendUnavailable):
        HttpBackend()


def test_http_vocab_mismatch(toy_server):
    backend = HttpBackend(toy_server, vocab_size=7)
    with pytest.raises(VocabMismatch):
        score_text("The man", backend)
