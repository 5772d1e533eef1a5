import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from detectllm.backend import DecodingConfig
from detectllm.datagen import PairedSample
from detectllm.detectors import METHODS
from detectllm.errors import EmptyScoreList, InputError, MissingMethod
from detectllm.evaluation import (
    BenchmarkReport,
    CostModel,
    auroc,
    cost_table,
    estimate_cost,
    recommend_method,
    run_benchmark,
)
from detectllm.evaluation.cost import MEASURED_TIMES, SCORING_TIMES
from detectllm.perturber import PerturbationConfig

from golden_recipes import BENCH_200, benchmark_200

# -- auroc -----------------------------------------------------------------

def test_auroc_examples():
    assert auroc([2, 3], [0, 1]) == 1.0
    assert auroc([1, 2, 2, 5], [5, 2, 1, 2]) == 0.5
    assert auroc([0.9, 0.4], [0.5, 0.1]) == 0.75


def test_auroc_errors():
    with pytest.raises(EmptyScoreList):
        auroc([], [1.0])
    with pytest.raises(ValueError):
        auroc([float("nan")], [1.0])


scores = st.lists(st.integers(-5, 5).map(float) | st.floats(-1e3, 1e3), min_size=1, max_size=50)


@settings(max_examples=300, deadline=None)
@given(scores, scores)
def test_auroc_matches_pairwise_and_is_symmetric(m, h):
    assert auroc(m, h) == pytest.approx(oracles.auroc(m, h), abs=1e-12)
    assert auroc(m, h) + auroc(h, m) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-20, 20), min_size=1, max_size=30), st.lists(st.integers(-20, 20), min_size=1, max_size=30))
def test_auroc_monotone_transform_invariance(m, h):
    base = auroc(m, h)
    for f in (lambda x: 3.0 * x + 7.0, math.exp, lambda x: x ** 3):
        assert auroc([f(x) for x in m], [f(x) for x in h]) == pytest.approx(base, abs=1e-12)


# -- cost --------------------------------------------------------------------

def test_cost_examples():
    assert estimate_cost("detect_gpt", CostModel(0.10, 0.06, 50)) == pytest.approx(8.06, abs=1e-12)
    assert estimate_cost("lrr", CostModel(0.10, 0.06)) == pytest.approx(0.12, abs=1e-12)
    assert estimate_cost("npr", CostModel(0.10, 0.06, 0)) == 0.06
    assert estimate_cost("log_p", CostModel(0.10, 0.60)) == 0.60


@settings(max_examples=200)
@given(st.sampled_from(METHODS), st.floats(0.01, 1), st.floats(0.01, 1), st.integers(0, 100), st.floats(0, 1), st.integers(0, 10))
def test_cost_monotone(method, t_p, t_m, n, bump, dn):
    base = estimate_cost(method, CostModel(t_p, t_m, n))
    assert estimate_cost(method, CostModel(t_p + bump, t_m, n)) >= base
    assert estimate_cost(method, CostModel(t_p, t_m + bump, n)) >= base
    assert estimate_cost(method, CostModel(t_p, t_m, n + dn)) >= base


def test_cost_table_shape():
    table = cost_table()
    assert set(table) == set(MEASURED_TIMES)
    assert all(list(row) == list(SCORING_TIMES) for row in table.values())
    # the simple-statistic rows are reproduced closely
    for m in ("log_p", "rank", "log_rank", "entropy", "lrr"):
        for pred, meas in zip(table[m].values(), MEASURED_TIMES[m]):
            assert abs(pred - meas) <= 0.15


def test_cost_validation():
    with pytest.raises(ValueError):
        CostModel(0.0, 0.1)
    with pytest.raises(ValueError):
        CostModel(0.1, 0.1, -1)


# -- benchmark ---------------------------------------------------------------

def _pair(i, machine, human):
    return PairedSample(f"p{i}", human, machine, "", DecodingConfig(seed=0), "toy")


def test_perfect_separation_log_p(fixture_model):
    from detectllm.corpus import fixture_sentences

    s = fixture_sentences()
    pairs = [_pair(0, s[0], "zebra quantum flux " * 4), _pair(1, s[1], "violet orbit nonsense " * 4)]
    report = run_benchmark(pairs, {"log_p"}, fixture_model)
    assert report.auroc == {"log_p": 1.0}
    assert report.n_failed == 0


def test_self_consistency_and_determinism(fixture_model, toy_pairs, toy_model):
    cfg = PerturbationConfig(n=3, seed=1)
    a = run_benchmark(toy_pairs, METHODS, toy_model, cfg)
    b = run_benchmark(toy_pairs, METHODS, toy_model, cfg, workers=4)
    assert a.dumps() == b.dumps()
    assert a.scores == b.scores
    for m in METHODS:
        assert set(a.scores) == set(METHODS)
        assert a.auroc[m] == auroc(*a.scores[m])
        assert 0.0 <= a.auroc[m] <= 1.0


def test_failed_pairs_dropped(toy_model, toy_pairs):
    bad = PairedSample("short", "too short", "tiny text", "", DecodingConfig(), "toy")
    report = run_benchmark([bad, *toy_pairs[:5]], {"npr", "lrr"}, toy_model, PerturbationConfig(n=2))
    assert report.n_failed == 1 and report.failures[0]["id"] == "short"
    assert len(report.scores["npr"][0]) == len(report.scores["npr"][1]) == 5
    assert report.to_json()["n_used"] == 5


def test_benchmark_input_errors(toy_model, toy_pairs):
    with pytest.raises(InputError):
        run_benchmark([], {"lrr"}, toy_model)
    with pytest.raises(InputError):
        run_benchmark(toy_pairs, {"npr"}, toy_model)


def _report(lrr_auc, npr_auc, n=10):
    return BenchmarkReport("d", "b", ["lrr", "npr"], {"lrr": lrr_auc, "npr": npr_auc},
                           {"perturbation": {"n": n}}, 10)


@pytest.mark.parametrize("lrr_auc,npr_auc,want", [(0.91, 0.89, "lrr"), (0.85, 0.93, "npr"), (0.9, 0.9, "lrr")])
def test_recommend_method(lrr_auc, npr_auc, want):
    assert recommend_method(_report(lrr_auc, npr_auc)) == want
    assert _report(lrr_auc, npr_auc).advisory == {"n_perturbations": 10, "rule_applies": True, "recommended": want}


def test_recommend_method_preconditions():
    with pytest.raises(InputError):
        recommend_method(_report(0.9, 0.8, n=50))
    assert _report(0.9, 0.8, n=50).advisory["rule_applies"] is False
    with pytest.raises(MissingMethod):
        recommend_method(BenchmarkReport("d", "b", ["lrr"], {"lrr": 0.9}, {}, 1))


def test_report_files(tmp_path, toy_model, toy_pairs):
    report = run_benchmark(toy_pairs[:10], {"lrr", "npr", "log_p"}, toy_model, PerturbationConfig(n=10))
    paths = report.write(tmp_path)
    obj = json.loads(paths["json"].read_text())
    assert obj["methods"] == ["log_p", "lrr", "npr"]
    assert obj["advisory"]["rule_applies"] is True
    assert "timing" not in obj
    rows = paths["csv"].read_text().splitlines()
    assert rows[0] == "id,label,log_p,lrr,npr" and len(rows) == 21
    assert "advisory" in paths["table"].read_text()


def test_timing_recorded_on_request(toy_model, toy_pairs):
    report = run_benchmark(toy_pairs[:4], {"npr", "log_p"}, toy_model, PerturbationConfig(n=2), record_timing=True)
    timing = report.to_json()["timing"]
    assert timing["t_m"] > 0 and timing["t_p"] > 0
    assert set(timing["per_method_seconds"]) == {"log_p", "npr"}


def test_golden_200_pair_report(toy_model, toy_split):
    golden = json.loads(BENCH_200.read_text())
    report = benchmark_200(toy_model, toy_split[1])
    got = report.to_json()
    for key in ("methods", "config", "n_pairs", "n_failed", "degenerate_counts", "advisory"):
        assert got[key] == golden[key]
    assert report.ids == golden["ids"]
    for m in METHODS:
        assert report.auroc[m] == pytest.approx(golden["auroc"][m], abs=1e-12)
        assert report.scores[m][0] == pytest.approx(golden["scores"][m]["machine"], abs=1e-9)
        assert report.scores[m][1] == pytest.approx(golden["scores"][m]["human"], abs=1e-9)
