#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "detectllm/token_stats.hpp"

namespace detectllm {

enum class Method { log_p, rank, log_rank, entropy, lrr, detect_gpt, npr };

inline constexpr std::array<Method, 7> kAllMethods = {Method::log_p,   Method::rank, Method::log_rank,
                                                      Method::entropy, Method::lrr,  Method::detect_gpt,
                                                      Method::npr};

std::string_view to_string(Method m);
/// Accepts canonical names plus the hyphen-free spellings (logp, logrank, detectgpt).
Method parse_method(std::string_view name);
bool needs_perturbations(Method m);

/// Denominators below this are treated as zero.
inline constexpr double kDegenerateEpsilon = 1e-6;
/// Score reported when a ratio's denominator vanishes. Large and finite so
/// rank-based evaluation still orders it as maximal machine evidence.
inline constexpr double kDegenerateMax = 1e9;

/// Every method is oriented so that a higher value means "more likely
/// machine-generated".
struct DetectorScore {
    Method method = Method::log_p;
    double value = 0.0;
    bool degenerate = false;
    std::int64_t n_perturbations_used = 0;

    bool operator==(const DetectorScore&) const = default;
};

/// Per-token means used by the text-level statistics.
double mean_log_prob(const TextStats& s);
double mean_log_rank(const TextStats& s);

DetectorScore log_p_score(const TextStats& s);
/// Negated mean rank.
DetectorScore rank_score(const TextStats& s);
/// Negated mean natural-log rank; 0 for an all-rank-1 text.
DetectorScore log_rank_score(const TextStats& s);
DetectorScore entropy_score(const TextStats& s);

/// Log-likelihood log-rank ratio, -sum(log p) / sum(log r).
DetectorScore lrr(const TextStats& s);

/// Original mean log-likelihood minus the mean over perturbations,
/// optionally divided by the perturbations' sample standard deviation.
DetectorScore detect_gpt(const TextStats& s, std::span<const TextStats> perturbed, bool normalize = false);

/// Mean perturbed log rank over the original's log rank.
DetectorScore npr(const TextStats& s, std::span<const TextStats> perturbed);

/// Dispatches on `m`; `perturbed` is ignored by perturbation-free methods.
DetectorScore score_method(Method m, const TextStats& s, std::span<const TextStats> perturbed = {},
                           bool normalize_detect_gpt = false);

}  // namespace detectllm
