#pragma once

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "detectllm/decoding.hpp"
#include "detectllm/token_stats.hpp"

namespace detectllm {

nlohmann::json token_to_json(const TokenStats& t);
TokenStats token_from_json(const nlohmann::json& j);

/// One stats-JSONL record: {"id", "backend_id", "vocab_size", "scored_from", "tokens"}.
nlohmann::json stats_to_json(const TextStats& s);
TextStats stats_from_json(const nlohmann::json& j);

nlohmann::json decoding_to_json(const DecodingConfig& cfg);
DecodingConfig decoding_from_json(const nlohmann::json& j);

void write_stats_jsonl(std::ostream& out, const TextStats& s);

/// Streams stats-JSONL records in file order, validating each one. Blank
/// lines are skipped. Throws ParseError carrying the line number or
/// InvariantViolation carrying the record id. Ranks or entropies that
/// cannot occur under the record's vocab_size raise VocabMismatch.
void read_stats_jsonl(std::istream& in, const std::function<void(TextStats&&)>& sink);
std::vector<TextStats> load_offline_stats(const std::string& path,
                                          std::optional<std::int64_t> expected_vocab_size = std::nullopt);

/// Precomputed stats keyed by record id. Perturbed variants of record `X`
/// are stored under ids `X::0`, `X::1`, ...
class StatsStore {
public:
    StatsStore() = default;
    explicit StatsStore(std::vector<TextStats> records);

    void add(TextStats s);
    const TextStats* find(const std::string& id) const;
    std::vector<const TextStats*> perturbed_of(const std::string& id) const;
    /// Records whose id has no `::` suffix, in insertion order.
    std::vector<const TextStats*> originals() const;

    static std::string perturbed_id(const std::string& id, std::size_t k);

private:
    std::vector<TextStats> records_;
    std::map<std::string, std::size_t> by_id_;
};

}  // namespace detectllm
