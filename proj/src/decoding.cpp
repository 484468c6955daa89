#include "detectllm/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "detectllm/error.hpp"

namespace detectllm {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::temperature: return "temperature";
        case Strategy::top_k: return "top_k";
        case Strategy::top_p: return "top_p";
    }
    return "temperature";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "temperature") return Strategy::temperature;
    if (name == "top_k" || name == "top-k") return Strategy::top_k;
    if (name == "top_p" || name == "top-p") return Strategy::top_p;
    fail(ErrorKind::InvalidArgument, "unknown decoding strategy '" + std::string(name) + "'");
}

DecodingConfig DecodingConfig::top_k_sampling(std::int64_t k, std::uint64_t seed) {
    DecodingConfig c;
    c.strategy = Strategy::top_k;
    c.k = k;
    c.seed = seed;
    return c;
}

DecodingConfig DecodingConfig::top_p_sampling(double p, std::uint64_t seed) {
    DecodingConfig c;
    c.strategy = Strategy::top_p;
    c.p = p;
    c.seed = seed;
    return c;
}

DecodingConfig DecodingConfig::greedy_decoding() {
    DecodingConfig c;
    c.greedy = true;
    return c;
}

void DecodingConfig::validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        fail(ErrorKind::InvalidArgument, "temperature must be > 0");
    if (k && strategy != Strategy::top_k) fail(ErrorKind::InvalidArgument, "k is only valid with the top_k strategy");
    if (p && strategy != Strategy::top_p) fail(ErrorKind::InvalidArgument, "p is only valid with the top_p strategy");
    if (k && *k < 1) fail(ErrorKind::InvalidArgument, "k must be >= 1");
    if (p && !(*p > 0.0 && *p <= 1.0)) fail(ErrorKind::InvalidArgument, "p must be in (0, 1]");
}

Candidates truncate_distribution(std::span<const double> probs, const DecodingConfig& cfg) {
    Candidates out;
    if (probs.empty()) return out;

    // Temperature in log space, then renormalise over the support.
    std::vector<double> scaled(probs.size(), 0.0);
    double max_log = -INFINITY;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) max_log = std::max(max_log, std::log(probs[i]) / cfg.temperature);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] > 0.0) {
            scaled[i] = std::exp(std::log(probs[i]) / cfg.temperature - max_log);
            total += scaled[i];
        }
    }

    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scaled[a] > scaled[b]; });
    while (!order.empty() && scaled[order.back()] == 0.0) order.pop_back();

    std::size_t keep = order.size();
    if (cfg.strategy == Strategy::top_k) {
        keep = std::min<std::size_t>(keep, static_cast<std::size_t>(cfg.effective_k()));
    } else if (cfg.strategy == Strategy::top_p) {
        const double target = cfg.effective_p() * total;
        double mass = 0.0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            mass += scaled[order[i]];
            if (mass >= target) {
                keep = i + 1;
                break;
            }
        }
    }
    order.resize(keep);

    double kept_mass = 0.0;
    for (auto i : order) kept_mass += scaled[i];
    out.index = order;
    out.prob.reserve(order.size());
    for (auto i : order) out.prob.push_back(scaled[i] / kept_mass);
    return out;
}

std::size_t sample_index(std::span<const double> probs, const DecodingConfig& cfg, Rng& rng) {
    if (probs.empty()) fail(ErrorKind::InvalidArgument, "cannot sample from an empty distribution");
    if (cfg.greedy) {
        return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    const Candidates c = truncate_distribution(probs, cfg);
    if (c.index.empty()) fail(ErrorKind::InvalidArgument, "distribution has no positive mass");
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < c.index.size(); ++i) {
        acc += c.prob[i];
        if (u < acc) return c.index[i];
    }
    return c.index.back();
}

}  // namespace detectllm
