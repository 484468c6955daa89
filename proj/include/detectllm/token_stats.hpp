#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace detectllm {

/// Scoring record for one token position: natural-log probability of the
/// observed token, its 1-based rank in the predictive distribution, and the
/// Shannon entropy (nats) of that distribution.
struct TokenStats {
    std::string token;
    double log_prob = 0.0;
    std::int64_t rank = 1;
    double entropy = 0.0;

    bool operator==(const TokenStats&) const = default;
};

/// Ordered per-position statistics for one passage.
struct TextStats {
    std::string id;
    std::vector<TokenStats> tokens;
    /// 1-based index of the first scored position in the backend's tokenization.
    std::int64_t scored_from = 1;
    std::string backend_id;
    std::int64_t vocab_size = 1;
    /// Number of tokens the passage had before the scoring cap was applied;
    /// 0 when nothing was dropped.
    std::int64_t truncated_from = 0;

    std::size_t size() const noexcept { return tokens.size(); }
    bool operator==(const TextStats&) const = default;
};

/// Throws InvariantViolation naming `record_id` when a token breaks the
/// log_prob/rank/entropy bounds.
void validate(const TokenStats& t, std::int64_t vocab_size, const std::string& record_id);
void validate(const TextStats& s);

/// Statistics of token `observed` under a full predictive distribution:
/// rank = 1 + number of entries strictly more probable, so ties share the
/// better rank. `probs` need not be normalised.
TokenStats token_stats_from_probs(std::span<const double> probs, std::size_t observed, std::string token = {});

/// Same from unnormalised logits, via a numerically stable log-softmax.
TokenStats token_stats_from_logits(std::span<const float> logits, std::size_t observed, std::string token = {});

/// Drops the first `count` scored positions, advancing scored_from.
TextStats drop_leading(TextStats s, std::size_t count);

}  // namespace detectllm
