#include "detectllm/toy_model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "detectllm/error.hpp"
#include "detectllm/rng.hpp"
#include "detectllm/text.hpp"

namespace detectllm {

namespace {
constexpr std::string_view kFormat = "detectllm-toy-lm";
constexpr int kFormatVersion = 1;
}  // namespace

double ToyModel::Distribution::prob(TokenId id) const {
    return (static_cast<double>(count(id)) + alpha) / denominator;
}

std::int64_t ToyModel::Distribution::count(TokenId id) const {
    const auto it = counts->next.find(id);
    return it == counts->next.end() ? 0 : it->second;
}

ToyModel ToyModel::train(const std::vector<std::string>& corpus, int order, double alpha, std::uint64_t seed) {
    if (corpus.empty()) fail(ErrorKind::EmptyCorpus, "training corpus has no sentences");
    if (order < 1) fail(ErrorKind::InvalidArgument, "n-gram order must be >= 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorKind::InvalidArgument, "smoothing alpha must be > 0");

    std::vector<std::vector<std::string>> sentences;
    sentences.reserve(corpus.size());
    std::set<std::string, std::less<>> types{std::string(kEos), std::string(kUnk)};
    std::size_t word_total = 0;
    for (const auto& line : corpus) {
        sentences.push_back(split_words(line));
        word_total += sentences.back().size();
        types.insert(sentences.back().begin(), sentences.back().end());
    }
    if (word_total == 0) fail(ErrorKind::EmptyCorpus, "training corpus contains no words");

    ToyModel m;
    m.order_ = order;
    m.alpha_ = alpha;
    m.seed_ = seed;
    m.vocab_.assign(types.begin(), types.end());
    for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_.emplace(m.vocab_[i], static_cast<TokenId>(i));
    m.eos_id_ = m.index_.at(std::string(kEos));
    m.unk_id_ = m.index_.at(std::string(kUnk));

    std::vector<TokenId> ids;
    for (const auto& words : sentences) {
        ids.clear();
        for (const auto& w : words) ids.push_back(m.index_.find(w)->second);
        ids.push_back(m.eos_id_);
        for (std::size_t i = 0; i < ids.size(); ++i) {
            const std::span<const TokenId> history(ids.data(), i);
            for (std::size_t len = 0; len < static_cast<std::size_t>(order); ++len) {
                auto& cc = m.table_[m.context_of(history, len)];
                ++cc.total;
                ++cc.next[ids[i]];
            }
        }
    }
    return m;
}

ToyModel::Context ToyModel::context_of(std::span<const TokenId> history, std::size_t length) const {
    Context ctx(length, bos_id_);
    const std::size_t take = std::min(length, history.size());
    std::copy(history.end() - static_cast<std::ptrdiff_t>(take), history.end(),
              ctx.end() - static_cast<std::ptrdiff_t>(take));
    return ctx;
}

ToyModel::TokenId ToyModel::lookup(std::string_view word) const {
    const auto it = index_.find(word);
    return it == index_.end() ? unk_id_ : it->second;
}

const ToyModel::ContextCounts* ToyModel::counts_for(const Context& context) const {
    const auto it = table_.find(context);
    return it == table_.end() ? nullptr : &it->second;
}

ToyModel::Distribution ToyModel::distribution(std::span<const TokenId> history) const {
    const double v = static_cast<double>(vocab_.size());
    for (std::size_t len = static_cast<std::size_t>(order_); len-- > 0;) {
        const ContextCounts* cc = counts_for(context_of(history, len));
        if (cc && cc->total > 0) {
            return Distribution{cc, static_cast<double>(cc->total) + alpha_ * v, alpha_, len};
        }
    }
    // The empty context always exists once training has seen a single token.
    fail(ErrorKind::InvariantViolation, "toy model has no unigram counts");
}

std::vector<double> ToyModel::dense_distribution(std::span<const TokenId> history) const {
    const Distribution d = distribution(history);
    std::vector<double> probs(vocab_.size(), d.alpha / d.denominator);
    for (const auto& [id, c] : d.counts->next) probs[static_cast<std::size_t>(id)] = (c + d.alpha) / d.denominator;
    return probs;
}

TokenStats ToyModel::stats_at(std::span<const TokenId> history, TokenId observed) const {
    const Distribution d = distribution(history);
    const std::int64_t observed_count = d.count(observed);

    TokenStats t;
    t.token = vocab_[static_cast<std::size_t>(observed)];
    t.log_prob = std::log((static_cast<double>(observed_count) + d.alpha) / d.denominator);
    t.rank = 1;
    double entropy = 0.0;
    for (const auto& [id, c] : d.counts->next) {
        if (c > observed_count) ++t.rank;
        const double p = (static_cast<double>(c) + d.alpha) / d.denominator;
        entropy -= p * std::log(p);
    }
    const auto unseen = static_cast<double>(vocab_.size() - d.counts->next.size());
    const double p0 = d.alpha / d.denominator;
    entropy -= unseen * p0 * std::log(p0);
    t.entropy = std::max(0.0, entropy);
    return t;
}

bool ToyModel::operator==(const ToyModel& other) const {
    if (order_ != other.order_ || alpha_ != other.alpha_ || seed_ != other.seed_ || vocab_ != other.vocab_) return false;
    if (table_.size() != other.table_.size()) return false;
    auto a = table_.begin();
    auto b = other.table_.begin();
    for (; a != table_.end(); ++a, ++b) {
        if (a->first != b->first || a->second.total != b->second.total || a->second.next != b->second.next)
            return false;
    }
    return true;
}

std::string ToyModel::to_json() const {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto& [ctx, cc] : table_) {
        nlohmann::json next = nlohmann::json::array();
        for (const auto& [id, c] : cc.next) next.push_back({id, c});
        contexts.push_back({{"context", ctx}, {"total", cc.total}, {"next", std::move(next)}});
    }
    nlohmann::json j = {{"format", kFormat}, {"version", kFormatVersion}, {"order", order_},
                        {"alpha", alpha_},   {"seed", seed_},             {"vocabulary", vocab_},
                        {"contexts", std::move(contexts)}};
    return j.dump() + "\n";
}

ToyModel ToyModel::from_json(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("toy model: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kFormatVersion)
            fail(ErrorKind::ParseError, "toy model: unsupported format or version");
        ToyModel m;
        m.order_ = j.at("order").get<int>();
        m.alpha_ = j.at("alpha").get<double>();
        m.seed_ = j.at("seed").get<std::uint64_t>();
        m.vocab_ = j.at("vocabulary").get<std::vector<std::string>>();
        for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_.emplace(m.vocab_[i], static_cast<TokenId>(i));
        if (!m.index_.contains(kEos) || !m.index_.contains(kUnk) || m.index_.size() != m.vocab_.size())
            fail(ErrorKind::ParseError, "toy model: vocabulary must be unique and contain </s> and <unk>");
        m.eos_id_ = m.index_.find(kEos)->second;
        m.unk_id_ = m.index_.find(kUnk)->second;
        const auto v = static_cast<TokenId>(m.vocab_.size());
        for (const auto& entry : j.at("contexts")) {
            ContextCounts cc;
            cc.total = entry.at("total").get<std::int64_t>();
            for (const auto& pair : entry.at("next")) {
                const auto id = pair.at(0).get<TokenId>();
                if (id < 0 || id >= v) fail(ErrorKind::ParseError, "toy model: token id out of range");
                cc.next[id] = pair.at(1).get<std::int64_t>();
            }
            m.table_.emplace(entry.at("context").get<Context>(), std::move(cc));
        }
        if (!m.counts_for({})) fail(ErrorKind::ParseError, "toy model: missing unigram counts");
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("toy model: ") + e.what());
    }
}

ToyModel ToyModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open toy model file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void ToyModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write toy model file '" + path + "'");
    out << to_json();
}

ToyBackend::ToyBackend(std::shared_ptr<const ToyModel> model, std::string id)
    : model_(std::move(model)), id_(std::move(id)) {
    if (!model_) fail(ErrorKind::InvalidArgument, "toy backend needs a model");
}

std::vector<std::string> ToyBackend::tokenize(std::string_view text) { return split_words(text); }

std::string ToyBackend::detokenize(const std::vector<std::string>& tokens) const { return join_words(tokens); }

std::string ToyBackend::join(std::string_view prompt, std::string_view continuation) const {
    if (continuation.empty()) return std::string(prompt);
    if (prompt.empty()) return std::string(continuation);
    return std::string(prompt) + " " + std::string(continuation);
}

TextStats ToyBackend::score(std::string_view text) {
    auto words = split_words(text);
    if (words.size() < 2) fail(ErrorKind::TextTooShort, "text has fewer than 2 tokens");

    TextStats s;
    s.backend_id = id_;
    s.vocab_size = static_cast<std::int64_t>(model_->vocab_size());
    s.scored_from = 1;
    if (words.size() > max_scored_tokens_) {
        s.truncated_from = static_cast<std::int64_t>(words.size());
        words.resize(max_scored_tokens_);
    }

    std::vector<ToyModel::TokenId> ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(model_->lookup(w));
    s.tokens.reserve(words.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        TokenStats t = model_->stats_at(std::span<const ToyModel::TokenId>(ids.data(), i), ids[i]);
        t.token = words[i];
        s.tokens.push_back(std::move(t));
    }
    return s;
}

std::string ToyBackend::generate(std::string_view prompt, std::int64_t max_tokens, const DecodingConfig& cfg) {
    cfg.validate();
    if (max_tokens < 1) fail(ErrorKind::InvalidArgument, "max_tokens must be >= 1");
    const auto words = split_words(prompt);
    if (words.empty()) fail(ErrorKind::InvalidArgument, "prompt must be non-empty");

    std::vector<ToyModel::TokenId> history;
    history.reserve(words.size() + static_cast<std::size_t>(max_tokens));
    for (const auto& w : words) history.push_back(model_->lookup(w));

    Rng rng(cfg.seed);
    std::vector<std::string> out;
    for (std::int64_t step = 0; step < max_tokens; ++step) {
        const auto probs = model_->dense_distribution(history);
        const auto id = static_cast<ToyModel::TokenId>(sample_index(probs, cfg, rng));
        if (id == model_->eos_id()) break;
        history.push_back(id);
        out.push_back(model_->vocabulary()[static_cast<std::size_t>(id)]);
    }
    return join_words(out);
}

}  // namespace detectllm
