#pragma once

// Deliberately naive reference implementations: one self-contained function
// per statistic, no shared helpers with the library.

#include <cmath>
#include <cstdint>
#include <vector>

#include "detectllm/rng.hpp"
#include "detectllm/token_stats.hpp"

namespace detectllm::testing {

inline double bf_log_p(const TextStats& s) {
    long double acc = 0;
    for (const auto& t : s.tokens) acc += t.log_prob;
    return static_cast<double>(acc / s.tokens.size());
}

inline double bf_rank(const TextStats& s) {
    long double acc = 0;
    for (const auto& t : s.tokens) acc += t.rank;
    return static_cast<double>(-acc / s.tokens.size());
}

inline double bf_log_rank(const TextStats& s) {
    long double acc = 0;
    for (const auto& t : s.tokens) acc += std::log(static_cast<long double>(t.rank));
    return static_cast<double>(-acc / s.tokens.size());
}

inline double bf_entropy(const TextStats& s) {
    long double acc = 0;
    for (const auto& t : s.tokens) acc += t.entropy;
    return static_cast<double>(acc / s.tokens.size());
}

inline double bf_lrr(const TextStats& s) {
    long double lp = 0, lr = 0;
    for (const auto& t : s.tokens) {
        lp += t.log_prob;
        lr += std::log(static_cast<long double>(t.rank));
    }
    return static_cast<double>(std::fabs(lp) / lr);
}

inline double bf_detect_gpt(const TextStats& s, const std::vector<TextStats>& perturbed, bool normalize) {
    auto mean_lp = [](const TextStats& x) {
        long double acc = 0;
        for (const auto& t : x.tokens) acc += t.log_prob;
        return acc / x.tokens.size();
    };
    long double mu = 0;
    for (const auto& p : perturbed) mu += mean_lp(p);
    mu /= perturbed.size();
    const long double d = mean_lp(s) - mu;
    if (!normalize) return static_cast<double>(d);
    long double ss = 0;
    for (const auto& p : perturbed) ss += (mean_lp(p) - mu) * (mean_lp(p) - mu);
    return static_cast<double>(d / std::sqrt(ss / (perturbed.size() - 1)));
}

inline double bf_npr(const TextStats& s, const std::vector<TextStats>& perturbed) {
    auto mean_lr = [](const TextStats& x) {
        long double acc = 0;
        for (const auto& t : x.tokens) acc += std::log(static_cast<long double>(t.rank));
        return acc / x.tokens.size();
    };
    long double acc = 0;
    for (const auto& p : perturbed) acc += mean_lr(p);
    return static_cast<double>(acc / perturbed.size() / mean_lr(s));
}

inline double bf_auroc(const std::vector<double>& machine, const std::vector<double>& human) {
    double wins = 0;
    for (double m : machine) {
        for (double h : human) wins += m > h ? 1.0 : (m == h ? 0.5 : 0.0);
    }
    return wins / (static_cast<double>(machine.size()) * static_cast<double>(human.size()));
}

/// Random TextStats over a vocabulary of `vocab` tokens; at least one rank is
/// above 1 so ratio statistics are well defined.
inline TextStats random_stats(Rng& rng, std::size_t min_tokens, std::size_t max_tokens, std::int64_t vocab = 50000) {
    TextStats s;
    s.vocab_size = vocab;
    const std::size_t n = min_tokens + rng.below(max_tokens - min_tokens + 1);
    for (std::size_t i = 0; i < n; ++i) {
        TokenStats t;
        t.token = "w" + std::to_string(rng.below(1000));
        t.rank = 1 + static_cast<std::int64_t>(rng.below(rng.uniform() < 0.5 ? 3 : 2000));
        t.log_prob = -(0.01 + 12.0 * rng.uniform());
        t.entropy = std::log(static_cast<double>(vocab)) * rng.uniform();
        s.tokens.push_back(t);
    }
    s.tokens[rng.below(n)].rank = 2 + static_cast<std::int64_t>(rng.below(100));
    return s;
}

}  // namespace detectllm::testing
