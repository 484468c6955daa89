#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detectllm/backend.hpp"

namespace detectllm {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

/// Word-level n-gram model with additive (Laplace) smoothing and
/// stupid-backoff-style context selection: the longest observed suffix of
/// the history decides the distribution, smoothed over the whole predictive
/// vocabulary, so every distribution sums to one.
///
/// The predictive vocabulary is the sorted set of corpus words plus `</s>`
/// and `<unk>`; `<s>` only ever appears as left padding. Immutable after
/// training.
class ToyModel {
public:
    using TokenId = std::int32_t;
    using Context = std::vector<TokenId>;

    struct ContextCounts {
        std::int64_t total = 0;
        std::map<TokenId, std::int64_t> next;
    };

    /// Sparse view of the predictive distribution at one history.
    struct Distribution {
        const ContextCounts* counts = nullptr;
        double denominator = 1.0;
        double alpha = 1.0;
        std::size_t context_length = 0;

        double prob(TokenId id) const;
        std::int64_t count(TokenId id) const;
    };

    static ToyModel train(const std::vector<std::string>& corpus, int order, double alpha, std::uint64_t seed);

    static ToyModel from_json(std::string_view json_text);
    std::string to_json() const;
    static ToyModel load(const std::string& path);
    void save(const std::string& path) const;

    int order() const noexcept { return order_; }
    double alpha() const noexcept { return alpha_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t vocab_size() const noexcept { return vocab_.size(); }
    const std::vector<std::string>& vocabulary() const noexcept { return vocab_; }
    TokenId eos_id() const noexcept { return eos_id_; }
    TokenId unk_id() const noexcept { return unk_id_; }

    /// Maps a word to its id, `<unk>` for out-of-vocabulary words.
    TokenId lookup(std::string_view word) const;

    /// Counts for an exact context (most recent token last); nullptr when unseen.
    const ContextCounts* counts_for(const Context& context) const;

    /// Distribution after `history`, which excludes the `<s>` padding.
    Distribution distribution(std::span<const TokenId> history) const;

    /// Dense probability vector over the predictive vocabulary.
    std::vector<double> dense_distribution(std::span<const TokenId> history) const;

    /// Exact statistics of `observed` following `history`. Rank and entropy
    /// come from the sparse counts: unseen tokens all share the smoothing mass.
    TokenStats stats_at(std::span<const TokenId> history, TokenId observed) const;

    bool operator==(const ToyModel& other) const;

private:
    Context context_of(std::span<const TokenId> history, std::size_t length) const;

    int order_ = 1;
    double alpha_ = 1.0;
    std::uint64_t seed_ = 0;
    std::vector<std::string> vocab_;
    std::map<std::string, TokenId, std::less<>> index_;
    TokenId eos_id_ = 0;
    TokenId unk_id_ = 0;
    TokenId bos_id_ = -1;
    std::map<Context, ContextCounts> table_;
};

/// Backend over a shared, immutable ToyModel; whitespace tokenisation.
class ToyBackend final : public Backend {
public:
    explicit ToyBackend(std::shared_ptr<const ToyModel> model, std::string id = "toy");

    std::string id() const override { return id_; }
    TextStats score(std::string_view text) override;
    std::string generate(std::string_view prompt, std::int64_t max_tokens, const DecodingConfig& cfg) override;
    std::vector<std::string> tokenize(std::string_view text) override;
    std::string detokenize(const std::vector<std::string>& tokens) const override;
    std::string join(std::string_view prompt, std::string_view continuation) const override;

    const ToyModel& model() const noexcept { return *model_; }

private:
    std::shared_ptr<const ToyModel> model_;
    std::string id_;
};

}  // namespace detectllm
