#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detectllm/rng.hpp"

namespace detectllm {

enum class Strategy { temperature, top_k, top_p };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

/// Sampling controls for generation. Temperature scales every strategy;
/// `k` is meaningful only for top_k and `p` only for top_p. `greedy` stands
/// in for the temperature -> 0 limit.
struct DecodingConfig {
    Strategy strategy = Strategy::temperature;
    double temperature = 1.0;
    std::optional<std::int64_t> k;
    std::optional<double> p;
    std::uint64_t seed = 0;
    bool greedy = false;

    static DecodingConfig top_k_sampling(std::int64_t k = 40, std::uint64_t seed = 0);
    static DecodingConfig top_p_sampling(double p = 0.96, std::uint64_t seed = 0);
    static DecodingConfig greedy_decoding();

    /// Throws InvalidArgument on out-of-range values or on a k/p supplied for
    /// the wrong strategy.
    void validate() const;

    std::int64_t effective_k() const { return k.value_or(40); }
    double effective_p() const { return p.value_or(0.96); }

    bool operator==(const DecodingConfig&) const = default;
};

/// The temperature grid swept for the decoding-sensitivity study.
inline constexpr double kTemperatureGrid[] = {0.5, 0.7, 0.9, 0.95, 1.0};

/// Indices of the tokens that survive the strategy's truncation, together
/// with their renormalised, temperature-adjusted probabilities.
struct Candidates {
    std::vector<std::size_t> index;
    std::vector<double> prob;
};

Candidates truncate_distribution(std::span<const double> probs, const DecodingConfig& cfg);

/// Draws one index from `probs` according to `cfg`. Greedy picks the lowest
/// index among the maximal probabilities.
std::size_t sample_index(std::span<const double> probs, const DecodingConfig& cfg, Rng& rng);

}  // namespace detectllm
