#include "detectllm/datagen.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "detectllm/error.hpp"
#include "detectllm/parallel.hpp"
#include "detectllm/rng.hpp"
#include "detectllm/stats_io.hpp"
#include "detectllm/text.hpp"

namespace detectllm {

bool is_degenerate_continuation(const std::vector<std::string>& tokens) {
    const std::size_t n = tokens.size();
    if (n == 0) return true;
    for (std::size_t period = 1; period <= n / 2; ++period) {
        bool repeats = true;
        for (std::size_t i = period; i < n && repeats; ++i) repeats = tokens[i] == tokens[i - period];
        if (repeats) return true;
    }
    return false;
}

namespace {

enum class Outcome { accepted, degenerate, under_length };

struct Candidate {
    std::size_t human_index = 0;
    std::vector<std::string> human_tokens;
};

struct Attempt {
    Outcome outcome = Outcome::degenerate;
    PairedSample pair;
    std::size_t resamples = 0;
    std::string note;
};

std::string pair_id(std::size_t human_index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "pair-%05zu", human_index);
    return buf;
}

Attempt generate_pair(const Candidate& c, Backend& backend, const DecodingConfig& cfg, const BuildOptions& options) {
    Attempt result;
    const std::vector<std::string> prompt_tokens(c.human_tokens.begin(),
                                                 c.human_tokens.begin() + static_cast<std::ptrdiff_t>(options.prompt_tokens));
    const std::string prompt = backend.detokenize(prompt_tokens);

    for (std::size_t attempt = 0; attempt <= options.resample_limit; ++attempt) {
        DecodingConfig dec = cfg;
        dec.seed = derive_seed(cfg.seed, options.seed, c.human_index, attempt);
        const std::string continuation =
            backend.generate(prompt, static_cast<std::int64_t>(options.max_new_tokens), dec);
        const auto cont_tokens = backend.tokenize(continuation);
        if (is_degenerate_continuation(cont_tokens)) {
            result.outcome = Outcome::degenerate;
            result.note = "empty or repetitive continuation";
            return result;
        }
        if (cont_tokens.size() < options.min_len) {
            result.outcome = Outcome::under_length;
            result.note = std::to_string(cont_tokens.size()) + " continuation tokens < " + std::to_string(options.min_len);
            if (attempt < options.resample_limit) ++result.resamples;
            continue;
        }

        const std::size_t keep = std::min(c.human_tokens.size(), options.prompt_tokens + cont_tokens.size());
        const std::vector<std::string> human(c.human_tokens.begin(),
                                             c.human_tokens.begin() + static_cast<std::ptrdiff_t>(keep));
        const std::vector<std::string> human_rest(human.begin() + static_cast<std::ptrdiff_t>(options.prompt_tokens),
                                                  human.end());
        if (human_rest == cont_tokens) {
            result.outcome = Outcome::degenerate;
            result.note = "continuation reproduces the human text";
            return result;
        }

        result.outcome = Outcome::accepted;
        result.pair.id = pair_id(c.human_index);
        result.pair.human_text = backend.detokenize(human);
        result.pair.machine_text = backend.join(prompt, continuation);
        result.pair.prompt = prompt;
        result.pair.decoding = dec;
        result.pair.backend_id = backend.id();
        return result;
    }
    return result;
}

}  // namespace

Dataset build_pairs(const std::vector<std::string>& human_texts, Backend& backend, const DecodingConfig& cfg,
                    const BuildOptions& options) {
    cfg.validate();
    if (options.prompt_tokens < 1) fail(ErrorKind::InvalidArgument, "prompt_tokens must be >= 1");
    if (options.n_pairs < 1) fail(ErrorKind::InvalidArgument, "n_pairs must be >= 1");
    if (options.min_len < 1) fail(ErrorKind::InvalidArgument, "min_len must be >= 1");
    if (options.max_new_tokens < options.min_len)
        fail(ErrorKind::InvalidArgument, "max_new_tokens must be >= min_len");

    Dataset out;
    auto& meta = out.metadata;
    meta.corpus_source = options.corpus_source;
    meta.backend_id = backend.id();
    meta.options = options;
    meta.decoding = cfg;
    meta.input_texts = human_texts.size();

    std::vector<Candidate> eligible;
    for (std::size_t i = 0; i < human_texts.size(); ++i) {
        auto tokens = backend.tokenize(normalize_text(human_texts[i]));
        if (tokens.size() < options.prompt_tokens + options.min_len) {
            ++meta.skipped_too_short;
            meta.skip_log.push_back("text " + std::to_string(i) + ": too short (" + std::to_string(tokens.size()) +
                                    " tokens)");
            continue;
        }
        eligible.push_back({i, std::move(tokens)});
    }
    meta.eligible_texts = eligible.size();
    if (eligible.size() < options.n_pairs)
        fail(ErrorKind::InsufficientCorpus, std::to_string(eligible.size()) + " eligible texts for " +
                                                std::to_string(options.n_pairs) + " requested pairs");

    Rng shuffle_rng(derive_seed(options.seed, 0x5eed));
    for (std::size_t i = eligible.size(); i > 1; --i) std::swap(eligible[i - 1], eligible[shuffle_rng.below(i)]);

    std::size_t next = 0;
    while (out.pairs.size() < options.n_pairs) {
        const std::size_t want = options.n_pairs - out.pairs.size();
        if (next + want > eligible.size())
            fail(ErrorKind::InsufficientCorpus, "ran out of eligible texts after skipping degenerate generations (" +
                                                    std::to_string(out.pairs.size()) + " of " +
                                                    std::to_string(options.n_pairs) + " pairs built)");
        std::vector<Attempt> batch(want);
        const std::size_t workers = backend.concurrent() ? options.workers : 1;
        parallel_for(want, workers, [&](std::size_t j) {
            batch[j] = generate_pair(eligible[next + j], backend, cfg, options);
        });
        for (std::size_t j = 0; j < want; ++j) {
            auto& a = batch[j];
            meta.resampled += a.resamples;
            if (a.outcome == Outcome::accepted) {
                out.pairs.push_back(std::move(a.pair));
                continue;
            }
            (a.outcome == Outcome::degenerate ? meta.skipped_degenerate : meta.skipped_under_length) += 1;
            meta.skip_log.push_back("text " + std::to_string(eligible[next + j].human_index) + ": " + a.note);
        }
        next += want;
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const PairedSample& a, const PairedSample& b) { return a.id < b.id; });
    return out;
}

nlohmann::json pair_to_json(const PairedSample& p) {
    return {{"id", p.id},
            {"human_text", p.human_text},
            {"machine_text", p.machine_text},
            {"prompt", p.prompt},
            {"decoding", decoding_to_json(p.decoding)},
            {"backend_id", p.backend_id}};
}

PairedSample pair_from_json(const nlohmann::json& j) {
    PairedSample p;
    p.id = j.at("id").get<std::string>();
    p.human_text = j.at("human_text").get<std::string>();
    p.machine_text = j.at("machine_text").get<std::string>();
    p.prompt = j.at("prompt").get<std::string>();
    p.decoding = decoding_from_json(j.at("decoding"));
    p.backend_id = j.at("backend_id").get<std::string>();
    return p;
}

nlohmann::json metadata_to_json(const DatasetMetadata& m) {
    const auto& o = m.options;
    return {{"corpus_source", m.corpus_source},
            {"backend_id", m.backend_id},
            {"normalization", "unicode NFC, whitespace collapsed and trimmed"},
            {"human_truncation", "human text cut to the machine text's token length"},
            {"prompt_tokens", o.prompt_tokens},
            {"n_pairs", o.n_pairs},
            {"min_len", o.min_len},
            {"max_new_tokens", o.max_new_tokens},
            {"resample_limit", o.resample_limit},
            {"seed", o.seed},
            {"decoding", decoding_to_json(m.decoding)},
            {"input_texts", m.input_texts},
            {"eligible_texts", m.eligible_texts},
            {"skipped",
             {{"too_short", m.skipped_too_short},
              {"degenerate", m.skipped_degenerate},
              {"under_length", m.skipped_under_length}}},
            {"resampled", m.resampled},
            {"skip_log", m.skip_log}};
}

void write_dataset_jsonl(std::ostream& out, const std::vector<PairedSample>& pairs) {
    for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

std::vector<PairedSample> read_dataset_jsonl(std::istream& in) {
    std::vector<PairedSample> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            pairs.push_back(pair_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::ParseError, "dataset line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            fail(ErrorKind::ParseError, "dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return pairs;
}

std::vector<PairedSample> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot open dataset file '" + path + "'");
    return read_dataset_jsonl(in);
}

}  // namespace detectllm
