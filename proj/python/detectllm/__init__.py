"""Zero-shot detection of machine-generated text.

Thin Python layer over the native ``_detectllm`` extension.
"""

import json

try:
    from . import _detectllm
except ImportError:  # in-tree build
    import _detectllm

DEGENERATE_MAX = _detectllm.DEGENERATE_MAX
Backend = _detectllm.Backend
DecodingConfig = _detectllm.DecodingConfig
DetectLLMError = _detectllm.DetectLLMError
DetectorScore = _detectllm.DetectorScore
HttpBackend = _detectllm.HttpBackend
Method = _detectllm.Method
PerturbationConfig = _detectllm.PerturbationConfig
PerturbPolicy = _detectllm.PerturbPolicy
Strategy = _detectllm.Strategy
TextStats = _detectllm.TextStats
TokenStats = _detectllm.TokenStats
ToyBackend = _detectllm.ToyBackend
ToyModel = _detectllm.ToyModel
auroc = _detectllm.auroc
estimate_cost = _detectllm.estimate_cost
method_name = _detectllm.method_name
needs_perturbations = _detectllm.needs_perturbations
parse_method = _detectllm.parse_method
perturb = _detectllm.perturb
recommend_method = _detectllm.recommend_method
stats_from_json = _detectllm.stats_from_json

__all__ = [
    "DEGENERATE_MAX",
    "Backend",
    "DecodingConfig",
    "DetectLLMError",
    "DetectorScore",
    "HttpBackend",
    "Method",
    "PerturbationConfig",
    "PerturbPolicy",
    "Strategy",
    "TextStats",
    "TokenStats",
    "ToyBackend",
    "ToyModel",
    "auroc",
    "build_pairs",
    "estimate_cost",
    "method_name",
    "needs_perturbations",
    "parse_method",
    "perturb",
    "recommend_method",
    "run_benchmark",
    "score",
    "score_method",
    "stats_from_json",
]


def _method(m):
    return parse_method(m) if isinstance(m, str) else m


def score_method(method, stats, perturbed=(), normalize_detect_gpt=False):
    """Apply one detector to precomputed statistics. ``method`` may be a
    Method or its name."""
    return _detectllm.score_method(_method(method), stats, list(perturbed), normalize_detect_gpt)


def score(backend, text, method, perturbations=None, normalize_detect_gpt=False):
    """Score one text. ``perturbations`` is a PerturbationConfig for the
    perturbation-based methods."""
    method = _method(method)
    stats = backend.score(text)
    perturbed = []
    if needs_perturbations(method):
        if perturbations is None:
            raise ValueError(f"{method_name(method)} needs a PerturbationConfig")
        perturbed = [backend.score(v) for v in perturb(text, perturbations, backend)]
    return score_method(method, stats, perturbed, normalize_detect_gpt)


def build_pairs(texts, backend, decoding, *, prompt_tokens=30, n_pairs=300, min_len=50,
                max_new_tokens=200, seed=0, workers=1):
    """Returns (pairs, metadata) as plain dicts."""
    lines, meta = _detectllm._build_pairs(list(texts), backend, decoding, prompt_tokens, n_pairs,
                                          min_len, max_new_tokens, seed, workers)
    return [json.loads(line) for line in lines], json.loads(meta)


def run_benchmark(pairs, backend, methods=None, perturbation=None, *, score_prompt=False,
                  normalize_detect_gpt=False, workers=1, dataset_id="dataset"):
    """Returns (report, scores_csv); ``report`` matches report.json."""
    if methods is None:
        methods = [Method.log_p, Method.rank, Method.log_rank, Method.entropy, Method.lrr,
                   Method.detect_gpt, Method.npr]
    methods = [_method(m) for m in methods]
    lines = [json.dumps(p) for p in pairs]
    report, csv = _detectllm._run_benchmark(lines, backend, methods, perturbation, score_prompt,
                                            normalize_detect_gpt, workers, dataset_id)
    return json.loads(report), csv
