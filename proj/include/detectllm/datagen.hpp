#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "detectllm/backend.hpp"
#include "detectllm/decoding.hpp"

namespace detectllm {

/// A human passage and a machine continuation of its opening tokens.
struct PairedSample {
    std::string id;
    std::string human_text;
    std::string machine_text;
    std::string prompt;
    DecodingConfig decoding;
    std::string backend_id;

    bool operator==(const PairedSample&) const = default;
};

struct BuildOptions {
    std::size_t prompt_tokens = 30;
    std::size_t n_pairs = 300;
    /// Minimum continuation length in backend tokens, for both sides.
    std::size_t min_len = 50;
    std::size_t max_new_tokens = 200;
    /// Extra generation attempts for an under-length continuation.
    std::size_t resample_limit = 3;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::string corpus_source;
};

struct DatasetMetadata {
    std::string corpus_source;
    std::string backend_id;
    BuildOptions options;
    DecodingConfig decoding;
    std::size_t input_texts = 0;
    std::size_t eligible_texts = 0;
    std::size_t skipped_too_short = 0;
    std::size_t skipped_degenerate = 0;
    std::size_t skipped_under_length = 0;
    std::size_t resampled = 0;
    std::vector<std::string> skip_log;
};

struct Dataset {
    std::vector<PairedSample> pairs;
    DatasetMetadata metadata;
};

/// True when the continuation is empty or is a pure repetition of a shorter
/// period (e.g. "a b a b a b").
bool is_degenerate_continuation(const std::vector<std::string>& tokens);

/// Prompts `backend` with the first prompt_tokens tokens of normalised human
/// texts and pairs each continuation with the human passage, truncated to the
/// machine passage's token length. Candidates are visited in a seed-determined
/// order; each candidate's generation seed depends only on (seed, index,
/// attempt), so output is independent of the worker count.
Dataset build_pairs(const std::vector<std::string>& human_texts, Backend& backend, const DecodingConfig& cfg,
                    const BuildOptions& options);

nlohmann::json pair_to_json(const PairedSample& p);
PairedSample pair_from_json(const nlohmann::json& j);
nlohmann::json metadata_to_json(const DatasetMetadata& m);

void write_dataset_jsonl(std::ostream& out, const std::vector<PairedSample>& pairs);
std::vector<PairedSample> read_dataset_jsonl(std::istream& in);
std::vector<PairedSample> load_dataset(const std::string& path);

}  // namespace detectllm
