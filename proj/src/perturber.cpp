#include "detectllm/perturber.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "detectllm/error.hpp"
#include "detectllm/rng.hpp"
#include "detectllm/text.hpp"

namespace detectllm {

namespace {

constexpr int kRedrawLimit = 3;
constexpr double kMaxWordCountChange = 0.20;

struct LexiconEntry {
    std::string_view word;
    double weight;
};

// Lexicon grouped by character length, each entry weighted 1 / (rank + 1).
const std::map<std::size_t, std::vector<LexiconEntry>>& lexicon_by_length() {
    static const auto table = [] {
        std::map<std::size_t, std::vector<LexiconEntry>> t;
        const auto words = replacement_lexicon();
        for (std::size_t r = 0; r < words.size(); ++r) {
            t[words[r].size()].push_back({words[r], 1.0 / static_cast<double>(r + 1)});
        }
        return t;
    }();
    return table;
}

bool acceptable_fill(const std::vector<std::string>& original, const std::vector<std::string>& variant) {
    if (variant == original) return false;
    const double change = std::abs(static_cast<double>(variant.size()) - static_cast<double>(original.size()));
    return change <= kMaxWordCountChange * static_cast<double>(original.size());
}

}  // namespace

std::string_view to_string(PerturbPolicy p) {
    return p == PerturbPolicy::lexical_local ? "lexical_local" : "mask_fill_backend";
}

PerturbPolicy parse_perturb_policy(std::string_view name) {
    if (name == "lexical_local") return PerturbPolicy::lexical_local;
    if (name == "mask_fill_backend") return PerturbPolicy::mask_fill_backend;
    fail(ErrorKind::InvalidArgument, "unknown perturbation policy '" + std::string(name) + "'");
}

void PerturbationConfig::validate() const {
    if (n < 1) fail(ErrorKind::InvalidArgument, "number of perturbations must be >= 1");
    if (!(mask_fraction > 0.0 && mask_fraction < 1.0)) fail(ErrorKind::InvalidArgument, "mask_fraction must be in (0, 1)");
    if (span_length < 1) fail(ErrorKind::InvalidArgument, "span_length must be >= 1");
}

std::size_t span_count(std::size_t word_count, double mask_fraction, std::size_t span_length) {
    // Products like 0.15 * 40 land a hair off the integer; do not round them up.
    const double spans = mask_fraction * static_cast<double>(word_count) / static_cast<double>(span_length);
    return static_cast<std::size_t>(std::ceil(spans - 1e-9));
}

std::size_t min_perturbable_words(const PerturbationConfig& cfg) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.span_length) / cfg.mask_fraction - 1e-9));
}

std::vector<Span> choose_spans(std::size_t word_count, std::size_t count, std::size_t span_length, Rng& rng) {
    if (count == 0) return {};
    if (span_length == 0 || count * span_length > word_count)
        fail(ErrorKind::TextTooShort, std::to_string(count) + " spans of " + std::to_string(span_length) +
                                          " words do not fit in " + std::to_string(word_count) + " words");
    // Each layout corresponds to a `count`-subset of the compressed positions
    // [0, word_count - count * (span_length - 1)); Floyd's algorithm draws it.
    const std::size_t slots = word_count - count * (span_length - 1);
    std::set<std::size_t> picked;
    for (std::size_t j = slots - count; j < slots; ++j) {
        const std::size_t t = rng.below(j + 1);
        if (!picked.insert(t).second) picked.insert(j);
    }
    std::vector<Span> spans;
    spans.reserve(count);
    std::size_t i = 0;
    for (const std::size_t y : picked) spans.push_back({y + i++ * (span_length - 1), span_length});
    return spans;
}

std::string draw_replacement(std::string_view original, Rng& rng) {
    const auto& table = lexicon_by_length();
    std::vector<LexiconEntry> pool;
    auto take = [&](std::size_t len) {
        const auto it = table.find(len);
        if (it == table.end()) return;
        for (const auto& e : it->second) {
            if (e.word != original) pool.push_back(e);
        }
    };
    for (std::size_t d = 0; pool.empty(); ++d) {
        if (d > 64) fail(ErrorKind::InvariantViolation, "replacement lexicon has no usable entry");
        take(original.size() + d);
        if (d > 0 && d <= original.size()) take(original.size() - d);
    }
    double total = 0.0;
    for (const auto& e : pool) total += e.weight;
    double u = rng.uniform() * total;
    for (const auto& e : pool) {
        u -= e.weight;
        if (u < 0.0) return std::string(e.word);
    }
    return std::string(pool.back().word);
}

std::vector<std::string> lexical_variant(const std::vector<std::string>& words, const PerturbationConfig& cfg,
                                         std::uint64_t seed, std::vector<Span>* spans_out) {
    Rng rng(seed);
    const auto length = static_cast<std::size_t>(cfg.span_length);
    const auto spans = choose_spans(words.size(), span_count(words.size(), cfg.mask_fraction, length), length, rng);
    std::vector<std::string> out = words;
    for (const auto& span : spans) {
        for (std::size_t j = span.begin; j < span.begin + span.length; ++j) out[j] = draw_replacement(words[j], rng);
    }
    if (spans_out) *spans_out = spans;
    return out;
}

PerturbationSet perturb(std::string_view text, const PerturbationConfig& cfg, Backend* backend,
                        std::string original_id) {
    cfg.validate();
    const auto words = split_words(text);
    const auto length = static_cast<std::size_t>(cfg.span_length);
    const std::size_t needed = std::max(min_perturbable_words(cfg),
                                        span_count(words.size(), cfg.mask_fraction, length) * length);
    if (words.size() < needed || words.empty())
        fail(ErrorKind::TextTooShort, "text has " + std::to_string(words.size()) + " words; perturbation needs " +
                                          std::to_string(needed));

    PerturbationSet set;
    set.original_id = std::move(original_id);
    set.config = cfg;
    set.variants.reserve(static_cast<std::size_t>(cfg.n));

    if (cfg.policy == PerturbPolicy::lexical_local) {
        for (std::int64_t k = 0; k < cfg.n; ++k) {
            std::vector<std::string> variant;
            for (int attempt = 0; attempt <= kRedrawLimit; ++attempt) {
                variant = lexical_variant(words, cfg, derive_seed(cfg.seed, k, attempt));
                if (variant != words) break;
                if (attempt == kRedrawLimit) set.flagged = true;
            }
            set.variants.push_back(join_words(variant));
        }
        return set;
    }

    if (!backend || !backend->supports_mask_fill())
        fail(ErrorKind::BackendUnavailable, "mask_fill_backend policy needs a backend serving /v1/perturb");
    PerturbRequest request{std::string(text), cfg.n, cfg.mask_fraction, cfg.span_length, cfg.seed};
    auto fills = backend->mask_fill(request);
    if (fills.size() != static_cast<std::size_t>(cfg.n))
        fail(ErrorKind::FillFailure, "mask-fill backend returned " + std::to_string(fills.size()) +
                                         " perturbations, expected " + std::to_string(cfg.n));
    for (std::size_t k = 0; k < fills.size(); ++k) {
        std::string variant = std::move(fills[k]);
        for (int attempt = 1; !acceptable_fill(words, split_words(variant)); ++attempt) {
            if (attempt > kRedrawLimit) {
                set.flagged = true;
                break;
            }
            request.n = 1;
            request.seed = derive_seed(cfg.seed, k, attempt);
            auto redraw = backend->mask_fill(request);
            if (redraw.size() != 1)
                fail(ErrorKind::FillFailure, "mask-fill backend returned " + std::to_string(redraw.size()) +
                                                 " perturbations for a single redraw");
            variant = std::move(redraw.front());
        }
        set.variants.push_back(std::move(variant));
    }
    return set;
}

}  // namespace detectllm
