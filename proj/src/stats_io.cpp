#include "detectllm/stats_io.hpp"

#include <fstream>

#include "detectllm/backend.hpp"
#include "detectllm/error.hpp"

namespace detectllm {

std::vector<std::string> Backend::mask_fill(const PerturbRequest&) {
    fail(ErrorKind::BackendUnavailable, "backend '" + id() + "' does not support mask filling");
}

TextStats score_text(Backend& backend, std::string_view text, std::string id) {
    TextStats s = backend.score(text);
    s.id = std::move(id);
    return s;
}

nlohmann::json token_to_json(const TokenStats& t) {
    return {{"token", t.token}, {"logprob", t.log_prob}, {"rank", t.rank}, {"entropy", t.entropy}};
}

TokenStats token_from_json(const nlohmann::json& j) {
    TokenStats t;
    t.token = j.at("token").get<std::string>();
    t.log_prob = j.at("logprob").get<double>();
    t.rank = j.at("rank").get<std::int64_t>();
    t.entropy = j.at("entropy").get<double>();
    return t;
}

nlohmann::json stats_to_json(const TextStats& s) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& t : s.tokens) tokens.push_back(token_to_json(t));
    nlohmann::json j = {{"id", s.id},
                        {"backend_id", s.backend_id},
                        {"vocab_size", s.vocab_size},
                        {"scored_from", s.scored_from},
                        {"tokens", std::move(tokens)}};
    if (s.truncated_from > 0) j["truncated_from"] = s.truncated_from;
    return j;
}

TextStats stats_from_json(const nlohmann::json& j) {
    TextStats s;
    s.id = j.at("id").get<std::string>();
    s.backend_id = j.at("backend_id").get<std::string>();
    s.vocab_size = j.at("vocab_size").get<std::int64_t>();
    s.scored_from = j.at("scored_from").get<std::int64_t>();
    s.truncated_from = j.value("truncated_from", std::int64_t{0});
    for (const auto& t : j.at("tokens")) s.tokens.push_back(token_from_json(t));
    return s;
}

nlohmann::json decoding_to_json(const DecodingConfig& cfg) {
    nlohmann::json j = {{"strategy", to_string(cfg.strategy)}, {"temperature", cfg.temperature}, {"seed", cfg.seed}};
    if (cfg.strategy == Strategy::top_k) j["k"] = cfg.effective_k();
    if (cfg.strategy == Strategy::top_p) j["p"] = cfg.effective_p();
    if (cfg.greedy) j["greedy"] = true;
    return j;
}

DecodingConfig decoding_from_json(const nlohmann::json& j) {
    DecodingConfig cfg;
    cfg.strategy = parse_strategy(j.at("strategy").get<std::string>());
    cfg.temperature = j.value("temperature", 1.0);
    if (cfg.strategy == Strategy::top_k && j.contains("k")) cfg.k = j.at("k").get<std::int64_t>();
    if (cfg.strategy == Strategy::top_p && j.contains("p")) cfg.p = j.at("p").get<double>();
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.greedy = j.value("greedy", false);
    return cfg;
}

void write_stats_jsonl(std::ostream& out, const TextStats& s) { out << stats_to_json(s).dump() << '\n'; }

void read_stats_jsonl(std::istream& in, const std::function<void(TextStats&&)>& sink) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        TextStats s;
        try {
            s = stats_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        validate(s);
        sink(std::move(s));
    }
}

std::vector<TextStats> load_offline_stats(const std::string& path, std::optional<std::int64_t> expected_vocab_size) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open stats file '" + path + "'");
    std::vector<TextStats> out;
    read_stats_jsonl(in, [&](TextStats&& s) {
        if (expected_vocab_size && s.vocab_size != *expected_vocab_size)
            fail(ErrorKind::VocabMismatch, "record '" + s.id + "' declares vocab_size " + std::to_string(s.vocab_size) +
                                               ", expected " + std::to_string(*expected_vocab_size));
        out.push_back(std::move(s));
    });
    return out;
}

StatsStore::StatsStore(std::vector<TextStats> records) {
    for (auto& r : records) add(std::move(r));
}

void StatsStore::add(TextStats s) {
    const auto [it, inserted] = by_id_.emplace(s.id, records_.size());
    if (!inserted) fail(ErrorKind::InvariantViolation, "duplicate stats record id '" + s.id + "'");
    records_.push_back(std::move(s));
}

const TextStats* StatsStore::find(const std::string& id) const {
    const auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::string StatsStore::perturbed_id(const std::string& id, std::size_t k) { return id + "::" + std::to_string(k); }

std::vector<const TextStats*> StatsStore::perturbed_of(const std::string& id) const {
    std::vector<const TextStats*> out;
    for (std::size_t k = 0;; ++k) {
        const TextStats* s = find(perturbed_id(id, k));
        if (!s) break;
        out.push_back(s);
    }
    return out;
}

std::vector<const TextStats*> StatsStore::originals() const {
    std::vector<const TextStats*> out;
    for (const auto& r : records_) {
        if (r.id.find("::") == std::string::npos) out.push_back(&r);
    }
    return out;
}

}  // namespace detectllm
