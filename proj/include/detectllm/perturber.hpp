#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "detectllm/backend.hpp"

namespace detectllm {

enum class PerturbPolicy { mask_fill_backend, lexical_local };

std::string_view to_string(PerturbPolicy p);
PerturbPolicy parse_perturb_policy(std::string_view name);

struct PerturbationConfig {
    std::int64_t n = 50;
    double mask_fraction = 0.15;
    std::int64_t span_length = 2;
    PerturbPolicy policy = PerturbPolicy::lexical_local;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const PerturbationConfig&) const = default;
};

struct PerturbationSet {
    std::string original_id;
    std::vector<std::string> variants;
    PerturbationConfig config;
    /// Set when a variant still equalled the original after the redraw budget.
    bool flagged = false;
};

/// Half-open word interval [begin, begin + length).
struct Span {
    std::size_t begin = 0;
    std::size_t length = 0;
    bool operator==(const Span&) const = default;
};

/// Number of spans masked in a `word_count`-word text: ceil(fraction * words / span_length).
std::size_t span_count(std::size_t word_count, double mask_fraction, std::size_t span_length);

/// Minimum word count accepted by `perturb` under `cfg`.
std::size_t min_perturbable_words(const PerturbationConfig& cfg);

/// Draws `count` non-overlapping spans uniformly over the admissible layouts,
/// sorted by position.
std::vector<Span> choose_spans(std::size_t word_count, std::size_t count, std::size_t span_length, Rng& rng);

/// Frequency-ranked replacement words used by the lexical_local policy.
std::span<const std::string_view> replacement_lexicon();

/// Draws a lexicon word for `original`: same character length when the
/// lexicon has one, otherwise the closest length; weighted by 1/rank and never
/// equal to `original`.
std::string draw_replacement(std::string_view original, Rng& rng);

/// One lexical_local rewrite of `words`; also reports the spans it masked.
std::vector<std::string> lexical_variant(const std::vector<std::string>& words, const PerturbationConfig& cfg,
                                         std::uint64_t seed, std::vector<Span>* spans_out = nullptr);

/// Produces cfg.n rewrites of `text`. `backend` is required for the
/// mask_fill_backend policy and ignored otherwise.
PerturbationSet perturb(std::string_view text, const PerturbationConfig& cfg, Backend* backend = nullptr,
                        std::string original_id = {});

}  // namespace detectllm
