#include "detectllm/token_stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "detectllm/error.hpp"

namespace detectllm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::TextTooShort: return "TextTooShort";
        case ErrorKind::VocabMismatch: return "VocabMismatch";
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::EmptyCorpus: return "EmptyCorpus";
        case ErrorKind::UnsupportedStrategy: return "UnsupportedStrategy";
        case ErrorKind::FillFailure: return "FillFailure";
        case ErrorKind::EmptyStats: return "EmptyStats";
        case ErrorKind::NoPerturbations: return "NoPerturbations";
        case ErrorKind::EmptyScoreList: return "EmptyScoreList";
        case ErrorKind::MissingMethod: return "MissingMethod";
        case ErrorKind::InsufficientCorpus: return "InsufficientCorpus";
        case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Error";
}

namespace {
// Entropy is accumulated in floating point; allow rounding above ln(V).
constexpr double kEntropySlack = 1e-9;
}  // namespace

void validate(const TokenStats& t, std::int64_t vocab_size, const std::string& record_id) {
    auto violation = [&](const std::string& what) {
        fail(ErrorKind::InvariantViolation, "record '" + record_id + "' token '" + t.token + "': " + what);
    };
    if (!std::isfinite(t.log_prob) || t.log_prob > 0.0) violation("log_prob must be finite and <= 0");
    if (t.rank < 1) violation("rank must be >= 1");
    if (t.rank > vocab_size)
        fail(ErrorKind::VocabMismatch, "record '" + record_id + "' token '" + t.token + "': rank " +
                                           std::to_string(t.rank) + " exceeds vocab_size " + std::to_string(vocab_size));
    if (!std::isfinite(t.entropy) || t.entropy < 0.0) violation("entropy must be finite and >= 0");
    if (t.entropy > std::log(static_cast<double>(vocab_size)) + kEntropySlack)
        fail(ErrorKind::VocabMismatch,
             "record '" + record_id + "' token '" + t.token + "': entropy exceeds ln(vocab_size)");
}

void validate(const TextStats& s) {
    if (s.vocab_size < 1) fail(ErrorKind::InvariantViolation, "record '" + s.id + "': vocab_size must be >= 1");
    if (s.scored_from < 1) fail(ErrorKind::InvariantViolation, "record '" + s.id + "': scored_from must be >= 1");
    for (const auto& t : s.tokens) validate(t, s.vocab_size, s.id);
}

TokenStats token_stats_from_probs(std::span<const double> probs, std::size_t observed, std::string token) {
    if (observed >= probs.size()) fail(ErrorKind::InvalidArgument, "observed token outside the distribution");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) fail(ErrorKind::InvalidArgument, "probabilities must be finite and >= 0");
        total += p;
    }
    if (!(probs[observed] > 0.0)) fail(ErrorKind::InvalidArgument, "observed token has zero probability");

    TokenStats t;
    t.token = std::move(token);
    t.log_prob = std::min(0.0, std::log(probs[observed] / total));
    double entropy = 0.0;
    for (double p : probs) {
        if (p > probs[observed]) ++t.rank;
        if (p > 0.0) entropy -= (p / total) * std::log(p / total);
    }
    t.entropy = std::max(0.0, entropy);
    return t;
}

TokenStats token_stats_from_logits(std::span<const float> logits, std::size_t observed, std::string token) {
    if (observed >= logits.size()) fail(ErrorKind::InvalidArgument, "observed token outside the vocabulary");
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double sum_exp = 0.0;
    for (float l : logits) sum_exp += std::exp(static_cast<double>(l) - max_logit);
    const double log_z = max_logit + std::log(sum_exp);

    TokenStats t;
    t.token = std::move(token);
    t.log_prob = std::min(0.0, static_cast<double>(logits[observed]) - log_z);
    double entropy = 0.0;
    for (float l : logits) {
        if (l > logits[observed]) ++t.rank;
        const double lp = static_cast<double>(l) - log_z;
        entropy -= std::exp(lp) * lp;
    }
    t.entropy = std::max(0.0, entropy);
    return t;
}

TextStats drop_leading(TextStats s, std::size_t count) {
    count = std::min(count, s.tokens.size());
    s.tokens.erase(s.tokens.begin(), s.tokens.begin() + static_cast<std::ptrdiff_t>(count));
    s.scored_from += static_cast<std::int64_t>(count);
    return s;
}

}  // namespace detectllm
