#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "detectllm/decoding.hpp"
#include "detectllm/token_stats.hpp"

namespace detectllm {

/// Body of a mask-fill request.
struct PerturbRequest {
    std::string text;
    std::int64_t n = 1;
    double mask_fraction = 0.15;
    std::int64_t span_length = 2;
    std::uint64_t seed = 0;
};

inline constexpr std::size_t kDefaultMaxScoredTokens = 512;

/// A causal language model that can score and continue text, and possibly
/// fill masks. Tokenisation belongs to the backend; callers never
/// re-tokenise.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string id() const = 0;

    /// Per-token statistics of `text`. Position 1 is scored against a
    /// begin-of-sequence marker. Throws TextTooShort below two tokens.
    virtual TextStats score(std::string_view text) = 0;

    virtual std::string generate(std::string_view prompt, std::int64_t max_tokens, const DecodingConfig& cfg) = 0;

    virtual std::vector<std::string> tokenize(std::string_view text) = 0;

    /// Rebuilds text from a prefix of tokenize()'s output.
    virtual std::string detokenize(const std::vector<std::string>& tokens) const = 0;

    /// Attaches a generated continuation to its prompt.
    virtual std::string join(std::string_view prompt, std::string_view continuation) const {
        return std::string(prompt) + std::string(continuation);
    }

    virtual bool supports_mask_fill() const { return false; }
    virtual std::vector<std::string> mask_fill(const PerturbRequest& request);

    /// False when the handle must not be used from several threads at once;
    /// the harness then serialises calls.
    virtual bool concurrent() const { return true; }

    void set_max_scored_tokens(std::size_t cap) { max_scored_tokens_ = cap; }
    std::size_t max_scored_tokens() const { return max_scored_tokens_; }

protected:
    std::size_t max_scored_tokens_ = kDefaultMaxScoredTokens;
};

/// Convenience wrapper matching the toolkit's scoring entry point; stamps the
/// record id.
TextStats score_text(Backend& backend, std::string_view text, std::string id = {});

}  // namespace detectllm
