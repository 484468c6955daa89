import math

import pytest

import detectllm as dl

CORPUS = [
    "the pilot told the captain about the fog .",
    "the captain ordered the crew to slow the ferry .",
    "the ferry crossed the river in under an hour .",
    "the crew waited near the harbor until noon .",
] * 5

TEXT = ("the captain told the crew about the river and the ferry crossed the harbor "
        "in under an hour before the fog lifted near the old bridge .")


@pytest.fixture(scope="module")
def backend():
    model = dl.ToyModel.train(CORPUS, order=3, alpha=0.1)
    return dl.ToyBackend(model)


def test_score_statistics(backend):
    stats = backend.score(TEXT)
    assert len(stats) == len(TEXT.split())
    assert all(t.rank >= 1 and t.log_prob <= 0 for t in stats.tokens)
    lrr = dl.score_method(dl.Method.lrr, stats)
    num = -sum(t.log_prob for t in stats.tokens)
    den = sum(math.log(t.rank) for t in stats.tokens)
    assert lrr.value == pytest.approx(num / den, rel=1e-12)


def test_worked_examples():
    s = dl.TextStats([dl.TokenStats("a", -1.0, 2, 0.0), dl.TokenStats("b", -2.0, 3, 0.0)], 100)
    assert dl.score_method("lrr", s).value == pytest.approx(3 / math.log(6))
    assert dl.auroc([0.9, 0.4], [0.5, 0.1]) == 0.75
    assert dl.estimate_cost(dl.Method.detect_gpt, 0.10, 0.06, 50) == pytest.approx(8.06)
    assert dl.recommend_method(0.9, 0.9) == dl.Method.lrr
    flat = dl.TextStats([dl.TokenStats("a", -1.0, 1, 0.0)] * 3, 100)
    degenerate = dl.score_method("lrr", flat)
    assert degenerate.degenerate and degenerate.value == dl.DEGENERATE_MAX


def test_typed_errors():
    with pytest.raises(dl.DetectLLMError) as err:
        dl.auroc([], [1.0])
    assert err.value.kind == "EmptyScoreList"
    with pytest.raises(dl.DetectLLMError):
        dl.TextStats([dl.TokenStats("a", -1.0, 0, 0.0)], 10)
    with pytest.raises(dl.DetectLLMError):
        dl.DecodingConfig(strategy=dl.Strategy.top_k, p=0.9)


def test_perturb_and_npr(backend):
    cfg = dl.PerturbationConfig(n=5, seed=3)
    variants = dl.perturb(TEXT, cfg)
    assert len(variants) == 5 and all(v != TEXT for v in variants)
    assert dl.perturb(TEXT, cfg) == variants
    result = dl.score(backend, TEXT, "npr", cfg)
    assert result.n_perturbations_used == 5
    with pytest.raises(ValueError):
        dl.score(backend, TEXT, "npr")


def test_pipeline_roundtrip(backend):
    texts = [TEXT + " " + TEXT] * 6
    pairs, meta = dl.build_pairs(texts, backend, dl.DecodingConfig(seed=1), prompt_tokens=5,
                                 n_pairs=2, min_len=5, max_new_tokens=20, seed=2)
    assert len(pairs) == 2 and meta["n_pairs"] == 2
    report, csv = dl.run_benchmark(pairs, backend, ["log_p", "lrr", "npr"],
                                   dl.PerturbationConfig(n=10, seed=1))
    assert set(report["auroc"]) == {"log_p", "lrr", "npr"}
    assert report["advisory"]["n_perturbations"] == 10
    assert csv.startswith("pair_id,label,method,score")
    again, _ = dl.run_benchmark(pairs, backend, ["log_p", "lrr", "npr"],
                                dl.PerturbationConfig(n=10, seed=1))
    assert again == report
