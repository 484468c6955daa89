#include "detectllm/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "detectllm/error.hpp"

namespace detectllm {

namespace {

void require_tokens(const TextStats& s) {
    if (s.tokens.empty()) fail(ErrorKind::EmptyStats, "record '" + s.id + "' has no scored tokens");
}

void require_perturbations(std::span<const TextStats> perturbed) {
    if (perturbed.empty()) fail(ErrorKind::NoPerturbations, "perturbation-based method needs at least one perturbation");
    for (const auto& p : perturbed) require_tokens(p);
}

DetectorScore make(Method m, double value, std::int64_t n = 0) { return DetectorScore{m, value, false, n}; }

DetectorScore degenerate(Method m, std::int64_t n = 0) { return DetectorScore{m, kDegenerateMax, true, n}; }

double sum_log_prob(const TextStats& s) {
    double acc = 0.0;
    for (const auto& t : s.tokens) acc += t.log_prob;
    return acc;
}

double sum_log_rank(const TextStats& s) {
    double acc = 0.0;
    for (const auto& t : s.tokens) acc += std::log(static_cast<double>(t.rank));
    return acc;
}

// Mean over perturbations in a canonical (sorted) order with a running
// update: permutation-invariant bit for bit, and exact when all values agree.
template <typename F>
double perturbed_mean(std::span<const TextStats> perturbed, F statistic) {
    std::vector<double> values;
    values.reserve(perturbed.size());
    for (const auto& p : perturbed) values.push_back(statistic(p));
    std::sort(values.begin(), values.end());
    double mean = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) mean += (values[i] - mean) / static_cast<double>(i + 1);
    return mean;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::log_p: return "log_p";
        case Method::rank: return "rank";
        case Method::log_rank: return "log_rank";
        case Method::entropy: return "entropy";
        case Method::lrr: return "lrr";
        case Method::detect_gpt: return "detect_gpt";
        case Method::npr: return "npr";
    }
    return "log_p";
}

Method parse_method(std::string_view name) {
    if (name == "log_p" || name == "logp" || name == "log-p" || name == "loglikelihood") return Method::log_p;
    if (name == "rank") return Method::rank;
    if (name == "log_rank" || name == "logrank" || name == "log-rank") return Method::log_rank;
    if (name == "entropy") return Method::entropy;
    if (name == "lrr") return Method::lrr;
    if (name == "detect_gpt" || name == "detectgpt" || name == "detect-gpt") return Method::detect_gpt;
    if (name == "npr") return Method::npr;
    fail(ErrorKind::InvalidArgument, "unknown method '" + std::string(name) + "'");
}

bool needs_perturbations(Method m) { return m == Method::detect_gpt || m == Method::npr; }

double mean_log_prob(const TextStats& s) {
    require_tokens(s);
    return sum_log_prob(s) / static_cast<double>(s.tokens.size());
}

double mean_log_rank(const TextStats& s) {
    require_tokens(s);
    return sum_log_rank(s) / static_cast<double>(s.tokens.size());
}

DetectorScore log_p_score(const TextStats& s) { return make(Method::log_p, mean_log_prob(s)); }

DetectorScore rank_score(const TextStats& s) {
    require_tokens(s);
    double acc = 0.0;
    for (const auto& t : s.tokens) acc += static_cast<double>(t.rank);
    return make(Method::rank, -acc / static_cast<double>(s.tokens.size()));
}

DetectorScore log_rank_score(const TextStats& s) { return make(Method::log_rank, -mean_log_rank(s)); }

DetectorScore entropy_score(const TextStats& s) {
    require_tokens(s);
    double acc = 0.0;
    for (const auto& t : s.tokens) acc += t.entropy;
    return make(Method::entropy, acc / static_cast<double>(s.tokens.size()));
}

DetectorScore lrr(const TextStats& s) {
    require_tokens(s);
    const double numerator = sum_log_prob(s);
    const double denominator = sum_log_rank(s);
    // The absolute-value and negated-ratio forms agree only under these signs.
    if (numerator > 0.0 || denominator < 0.0)
        fail(ErrorKind::InvariantViolation, "record '" + s.id + "': sum log p must be <= 0 and sum log r >= 0");
    if (denominator < kDegenerateEpsilon) return degenerate(Method::lrr);
    return make(Method::lrr, -numerator / denominator);
}

DetectorScore detect_gpt(const TextStats& s, std::span<const TextStats> perturbed, bool normalize) {
    const double original = mean_log_prob(s);
    require_perturbations(perturbed);
    const auto n = static_cast<std::int64_t>(perturbed.size());

    const double mean = perturbed_mean(perturbed, mean_log_prob);
    const double diff = original - mean;
    if (!normalize) return make(Method::detect_gpt, diff, n);

    if (n < 2) return degenerate(Method::detect_gpt, n);
    double ss = 0.0;
    for (const auto& p : perturbed) {
        const double d = mean_log_prob(p) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd < kDegenerateEpsilon) return degenerate(Method::detect_gpt, n);
    return make(Method::detect_gpt, diff / sd, n);
}

DetectorScore npr(const TextStats& s, std::span<const TextStats> perturbed) {
    const double original = mean_log_rank(s);
    require_perturbations(perturbed);
    const auto n = static_cast<std::int64_t>(perturbed.size());
    if (original < kDegenerateEpsilon) return degenerate(Method::npr, n);
    const double mean = perturbed_mean(perturbed, mean_log_rank);
    return make(Method::npr, mean / original, n);
}

DetectorScore score_method(Method m, const TextStats& s, std::span<const TextStats> perturbed,
                           bool normalize_detect_gpt) {
    switch (m) {
        case Method::log_p: return log_p_score(s);
        case Method::rank: return rank_score(s);
        case Method::log_rank: return log_rank_score(s);
        case Method::entropy: return entropy_score(s);
        case Method::lrr: return lrr(s);
        case Method::detect_gpt: return detect_gpt(s, perturbed, normalize_detect_gpt);
        case Method::npr: return npr(s, perturbed);
    }
    fail(ErrorKind::InvalidArgument, "unknown method");
}

}  // namespace detectllm
