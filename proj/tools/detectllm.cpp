#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "detectllm/datagen.hpp"
#include "detectllm/detectors.hpp"
#include "detectllm/error.hpp"
#include "detectllm/eval.hpp"
#include "detectllm/http_backend.hpp"
#include "detectllm/perturber.hpp"
#include "detectllm/stats_io.hpp"
#include "detectllm/text.hpp"
#include "detectllm/toy_model.hpp"

namespace fs = std::filesystem;
using namespace detectllm;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kBackend = 3, kInternal = 4 };

int verbosity = 0;

void note(const std::string& msg) {
    if (verbosity > 0) std::cerr << "detectllm: " << msg << '\n';
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::BackendUnavailable:
        case ErrorKind::FillFailure: return kBackend;
        case ErrorKind::InvariantViolation: return kInternal;
        default: return kUsage;
    }
}

/// A usage problem detected by the CLI itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_input(const std::string& path) {
    if (path.empty() || path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    return read_file(path);
}

std::vector<std::string> read_lines(const std::string& path) {
    std::istringstream in(read_input(path));
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) lines.push_back(line);
    }
    return lines;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path.string() + "'");
    out << content;
}

struct BackendArgs {
    std::string kind = "toy";
    std::string model_file;
    std::string url;
    std::string stats_file;
    std::size_t max_tokens = kDefaultMaxScoredTokens;
    double timeout = 120.0;
};

void add_backend_options(CLI::App* cmd, BackendArgs& b, bool allow_offline) {
    auto* opt = cmd->add_option("--backend", b.kind, "Scoring backend")->capture_default_str();
    if (allow_offline) {
        opt->check(CLI::IsMember({"toy", "http", "offline"}));
        cmd->add_option("--stats-file", b.stats_file, "Precomputed stats JSONL (offline backend)");
    } else {
        opt->check(CLI::IsMember({"toy", "http"}));
    }
    cmd->add_option("--model-file", b.model_file, "Toy model JSON (toy backend)");
    cmd->add_option("--url", b.url, std::string("Server URL (http backend); defaults to $") + kBackendUrlEnv);
    cmd->add_option("--max-tokens", b.max_tokens, "Scoring cap in tokens")->capture_default_str();
    cmd->add_option("--timeout", b.timeout, "HTTP timeout in seconds")->capture_default_str();
}

std::unique_ptr<Backend> make_backend(const BackendArgs& b) {
    if (b.kind != "toy" && !b.model_file.empty()) throw UsageError("--model-file requires --backend toy");
    if (b.kind != "http" && !b.url.empty()) throw UsageError("--url requires --backend http");
    if (b.kind != "offline" && !b.stats_file.empty()) throw UsageError("--stats-file requires --backend offline");

    std::unique_ptr<Backend> backend;
    if (b.kind == "toy") {
        if (b.model_file.empty()) throw UsageError("--backend toy needs --model-file (see train-toy)");
        backend = std::make_unique<ToyBackend>(std::make_shared<const ToyModel>(ToyModel::load(b.model_file)));
    } else if (b.kind == "http") {
        std::string url = b.url;
        if (url.empty()) url = HttpBackend::url_from_env().value_or("");
        if (url.empty()) throw UsageError(std::string("--backend http needs --url or $") + kBackendUrlEnv);
        backend = std::make_unique<HttpBackend>(HttpBackend::Options{url, "http", b.timeout, true});
    } else {
        throw UsageError("offline backend cannot generate or tokenise; use toy or http");
    }
    backend->set_max_scored_tokens(b.max_tokens);
    return backend;
}

struct PerturbArgs {
    std::int64_t n = 0;
    double mask_fraction = 0.15;
    std::int64_t span_length = 2;
    std::string policy = "lexical_local";
};

void add_perturb_options(CLI::App* cmd, PerturbArgs& p, std::int64_t default_n, const char* n_flag) {
    p.n = default_n;
    cmd->add_option(n_flag, p.n, "Number of perturbations")->capture_default_str();
    cmd->add_option("--mask-fraction", p.mask_fraction, "Fraction of words masked")->capture_default_str();
    cmd->add_option("--span-length", p.span_length, "Words per masked span")->capture_default_str();
    cmd->add_option("--perturb-policy", p.policy, "Fill source")
        ->check(CLI::IsMember({"lexical_local", "mask_fill_backend"}))
        ->capture_default_str();
}

PerturbationConfig perturbation_config(const PerturbArgs& p, std::uint64_t seed) {
    PerturbationConfig cfg;
    cfg.n = p.n;
    cfg.mask_fraction = p.mask_fraction;
    cfg.span_length = p.span_length;
    cfg.policy = parse_perturb_policy(p.policy);
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

struct ScoreArgs {
    std::string method;
    std::string input;
    std::string record_id;
    std::string perturbed_stats;
    std::optional<std::int64_t> vocab_size;
    bool normalize = false;
    std::uint64_t seed = 0;
    BackendArgs backend;
    PerturbArgs perturb;
};

int run_score(const ScoreArgs& a) {
    const Method method = parse_method(a.method);
    const bool needs = needs_perturbations(method);
    if (!a.perturbed_stats.empty() && a.backend.kind != "offline")
        throw UsageError("--perturbed-stats requires --backend offline");

    TextStats stats;
    std::vector<TextStats> perturbed;
    if (a.backend.kind == "offline") {
        if (a.backend.stats_file.empty()) throw UsageError("--backend offline needs --stats-file");
        StatsStore store(load_offline_stats(a.backend.stats_file, a.vocab_size));
        if (!a.perturbed_stats.empty()) {
            for (auto& s : load_offline_stats(a.perturbed_stats, a.vocab_size)) store.add(std::move(s));
        }
        const TextStats* record = nullptr;
        if (!a.record_id.empty()) {
            record = store.find(a.record_id);
            if (!record) throw UsageError("no record '" + a.record_id + "' in the stats file");
        } else {
            const auto originals = store.originals();
            if (originals.empty()) throw UsageError("stats file holds no records");
            record = originals.front();
        }
        stats = *record;
        if (needs) {
            auto variants = store.perturbed_of(record->id);
            if (variants.empty())
                throw UsageError("offline mode cannot perturb text; " + std::string(to_string(method)) +
                                 " needs pre-perturbed stats (records '" + record->id +
                                 "::k', e.g. via --perturbed-stats)");
            if (a.perturb.n > 0) {
                if (static_cast<std::size_t>(a.perturb.n) > variants.size())
                    throw UsageError("--perturbations " + std::to_string(a.perturb.n) + " but only " +
                                     std::to_string(variants.size()) + " perturbed records for '" + record->id + "'");
                variants.resize(static_cast<std::size_t>(a.perturb.n));
            }
            for (const auto* v : variants) perturbed.push_back(*v);
        }
    } else {
        if (needs && a.perturb.n < 1)
            throw UsageError(std::string(to_string(method)) + " needs a perturbation source: pass --perturbations N");
        auto backend = make_backend(a.backend);
        const std::string text = normalize_text(read_input(a.input));
        const std::string id = a.record_id.empty() ? "input" : a.record_id;
        stats = score_text(*backend, text, id);
        if (needs) {
            const auto cfg = perturbation_config(a.perturb, a.seed);
            const auto set = perturb(text, cfg, backend.get(), id);
            if (set.flagged) note("some perturbations equal the original after redraws");
            for (std::size_t k = 0; k < set.variants.size(); ++k)
                perturbed.push_back(score_text(*backend, set.variants[k], StatsStore::perturbed_id(id, k)));
        }
    }

    const auto score = score_method(method, stats, perturbed, a.normalize);
    ordered_json out = {{"method", to_string(score.method)},
                        {"score", score.value},
                        {"degenerate", score.degenerate},
                        {"n_perturbations", score.n_perturbations_used}};
    std::cout << out.dump() << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkArgs {
    std::string dataset;
    std::string methods;
    std::string out_dir = ".";
    std::string dataset_id;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    bool score_prompt = false;
    bool normalize = false;
    BackendArgs backend;
    PerturbArgs perturb;
};

std::vector<Method> parse_methods(const std::string& list) {
    std::vector<Method> out;
    if (list.empty()) return {kAllMethods.begin(), kAllMethods.end()};
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(parse_method(item));
    }
    if (out.empty()) throw UsageError("--methods lists no methods");
    return out;
}

int run_benchmark_cmd(const BenchmarkArgs& a) {
    const auto pairs = load_dataset(a.dataset);
    if (pairs.empty()) throw UsageError("dataset '" + a.dataset + "' has no pairs");

    BenchmarkOptions opt;
    opt.methods = parse_methods(a.methods);
    opt.score_prompt = a.score_prompt;
    opt.normalize_detect_gpt = a.normalize;
    opt.workers = a.workers;
    opt.dataset_id = a.dataset_id.empty() ? fs::path(a.dataset).stem().string() : a.dataset_id;
    if (std::any_of(opt.methods.begin(), opt.methods.end(), needs_perturbations)) {
        if (a.perturb.n < 1) throw UsageError("perturbation-based methods need --perturbations N (N >= 1)");
        opt.perturbation = perturbation_config(a.perturb, a.seed);
    }

    auto backend = make_backend(a.backend);
    note("scoring " + std::to_string(pairs.size()) + " pairs");
    const auto report = run_benchmark(pairs, *backend, opt);
    for (const auto& line : report.drop_log) note("dropped " + line);

    const fs::path dir(a.out_dir);
    const std::string report_json = report_to_json(report).dump(2) + "\n";
    write_file(dir / "report.json", report_json);
    write_file(dir / "report.txt", report_table(report));
    write_file(dir / "scores.csv", scores_csv(report));
    write_file(dir / "timing.json", timing_to_json(report).dump(2) + "\n");
    std::cout << report_json;
    return kOk;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string input;
    std::string out;
    std::string metadata;
    std::string decoding = "temperature";
    std::optional<std::int64_t> k;
    std::optional<double> p;
    double temperature = 1.0;
    bool greedy = false;
    std::uint64_t seed = 0;
    BuildOptions build;
    BackendArgs backend;
};

int run_gen_dataset(GenArgs a) {
    DecodingConfig cfg;
    cfg.strategy = parse_strategy(a.decoding);
    cfg.temperature = a.temperature;
    cfg.k = a.k;
    cfg.p = a.p;
    cfg.greedy = a.greedy;
    cfg.seed = a.seed;
    cfg.validate();

    auto backend = make_backend(a.backend);
    const auto texts = read_lines(a.input);
    a.build.seed = a.seed;
    a.build.corpus_source = a.input.empty() || a.input == "-" ? "<stdin>" : a.input;
    const auto dataset = build_pairs(texts, *backend, cfg, a.build);

    std::ostringstream jsonl;
    write_dataset_jsonl(jsonl, dataset.pairs);
    write_file(a.out, jsonl.str());
    const std::string meta_path = a.metadata.empty() ? a.out + ".meta.json" : a.metadata;
    write_file(meta_path, metadata_to_json(dataset.metadata).dump(2) + "\n");
    const auto& m = dataset.metadata;
    std::cout << ordered_json{{"pairs", dataset.pairs.size()},
                              {"output", a.out},
                              {"metadata", meta_path},
                              {"skipped_too_short", m.skipped_too_short},
                              {"skipped_degenerate", m.skipped_degenerate},
                              {"skipped_under_length", m.skipped_under_length}}
                     .dump()
              << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct PerturbCmdArgs {
    std::string input;
    std::string id = "input";
    std::uint64_t seed = 0;
    BackendArgs backend;
    PerturbArgs perturb;
};

int run_perturb(const PerturbCmdArgs& a) {
    const auto cfg = perturbation_config(a.perturb, a.seed);
    std::unique_ptr<Backend> backend;
    if (cfg.policy == PerturbPolicy::mask_fill_backend) backend = make_backend(a.backend);
    const auto set = perturb(normalize_text(read_input(a.input)), cfg, backend.get(), a.id);
    ordered_json out = {{"original_id", set.original_id},
                        {"variants", set.variants},
                        {"config",
                         {{"n", cfg.n},
                          {"mask_fraction", cfg.mask_fraction},
                          {"span_length", cfg.span_length},
                          {"policy", to_string(cfg.policy)},
                          {"seed", cfg.seed}}},
                        {"flagged", set.flagged}};
    std::cout << dump(out);
    return kOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string corpus;
    std::string out;
    int order = 3;
    double alpha = 0.01;
    std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
    std::vector<std::string> lines;
    for (const auto& l : read_lines(a.corpus)) lines.push_back(normalize_text(l));
    const auto model = ToyModel::train(lines, a.order, a.alpha, a.seed);
    model.save(a.out);
    std::cout << ordered_json{{"model_file", a.out},
                              {"order", model.order()},
                              {"alpha", model.alpha()},
                              {"vocab_size", model.vocab_size()},
                              {"lines", lines.size()}}
                     .dump()
              << '\n';
    return kOk;
}

// ---------------------------------------------------------------------------

struct CostArgs {
    std::string method;
    std::int64_t n = 50;
    std::optional<double> t_p;
    std::optional<double> t_m;
    std::string model;
    std::string perturber;
};

int run_cost(const CostArgs& a) {
    const Method method = parse_method(a.method);
    std::optional<double> t_m = a.t_m;
    std::optional<double> t_p = a.t_p;
    if (!a.model.empty()) {
        if (t_m) throw UsageError("--t-m and --model are mutually exclusive");
        t_m = find_timing(scorer_timings(), a.model);
        if (!t_m) throw UsageError("unknown --model preset '" + a.model + "'");
    }
    if (!a.perturber.empty()) {
        if (t_p) throw UsageError("--t-p and --perturber are mutually exclusive");
        t_p = find_timing(perturber_timings(), a.perturber);
        if (!t_p) throw UsageError("unknown --perturber preset '" + a.perturber + "'");
    }
    if (!t_m) throw UsageError("cost needs --t-m or --model");
    const bool needs = needs_perturbations(method);
    if (needs && !t_p) throw UsageError(std::string(to_string(method)) + " cost needs --t-p or --perturber");

    CostModel cm;
    cm.t_m = *t_m;
    cm.t_p = t_p.value_or(1.0);
    cm.n = needs ? a.n : 0;
    const double seconds = estimate_cost(method, cm);
    ordered_json out = {{"method", to_string(method)}, {"seconds", seconds}, {"t_m", cm.t_m}};
    if (needs) {
        out["t_p"] = cm.t_p;
        out["n"] = cm.n;
    }
    std::cout << out.dump() << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Zero-shot machine-generated text detection toolkit", "detectllm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "detectllm 0.1.0");
    int verbose_count = 0;
    app.add_flag("-v,--verbose", verbose_count, "Diagnostics on stderr (repeatable)");
    std::function<int()> action;

    ScoreArgs score;
    auto* score_cmd = app.add_subcommand("score", "Score one text with one detector");
    score_cmd->add_option("--method", score.method, "log_p|rank|log_rank|entropy|lrr|detectgpt|npr")->required();
    score_cmd->add_option("--input", score.input, "Text file (default: stdin)");
    score_cmd->add_option("--id", score.record_id, "Record id (offline: which record to score)");
    score_cmd->add_option("--perturbed-stats", score.perturbed_stats, "Stats JSONL of perturbed variants (offline)");
    score_cmd->add_option("--vocab-size", score.vocab_size, "Expected vocabulary size of offline stats");
    score_cmd->add_flag("--normalize", score.normalize, "Divide DetectGPT by the perturbed std");
    score_cmd->add_option("--seed", score.seed, "Seed")->capture_default_str();
    add_backend_options(score_cmd, score.backend, true);
    add_perturb_options(score_cmd, score.perturb, 0, "--perturbations");
    score_cmd->callback([&] { action = [&] { return run_score(score); }; });

    BenchmarkArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "AUROC of detectors over a paired dataset");
    bench_cmd->add_option("--dataset", bench.dataset, "Dataset JSONL")->required();
    bench_cmd->add_option("--methods", bench.methods, "Comma-separated methods (default: all)");
    bench_cmd->add_option("--out-dir", bench.out_dir, "Directory for report files")->capture_default_str();
    bench_cmd->add_option("--dataset-id", bench.dataset_id, "Name in the report (default: file stem)");
    bench_cmd->add_option("--seed", bench.seed, "Perturbation seed")->capture_default_str();
    bench_cmd->add_option("--workers", bench.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--score-prompt", bench.score_prompt, "Also score the shared prompt tokens");
    bench_cmd->add_flag("--normalize-detectgpt", bench.normalize, "Divide DetectGPT by the perturbed std");
    add_backend_options(bench_cmd, bench.backend, false);
    add_perturb_options(bench_cmd, bench.perturb, 50, "--perturbations");
    bench_cmd->callback([&] { action = [&] { return run_benchmark_cmd(bench); }; });

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-dataset", "Build human/machine pairs from human texts");
    gen_cmd->add_option("--input", gen.input, "Human texts, one per line (default: stdin)");
    gen_cmd->add_option("--out", gen.out, "Output dataset JSONL")->required();
    gen_cmd->add_option("--metadata", gen.metadata, "Metadata JSON (default: <out>.meta.json)");
    gen_cmd->add_option("--prompt-tokens", gen.build.prompt_tokens, "Prompt length in tokens")->capture_default_str();
    gen_cmd->add_option("--pairs", gen.build.n_pairs, "Number of pairs")->capture_default_str();
    gen_cmd->add_option("--min-len", gen.build.min_len, "Minimum continuation tokens")->capture_default_str();
    gen_cmd->add_option("--max-new-tokens", gen.build.max_new_tokens, "Generation budget")->capture_default_str();
    gen_cmd->add_option("--decoding", gen.decoding, "temperature|top_k|top_p")
        ->check(CLI::IsMember({"temperature", "top_k", "top_p"}))
        ->capture_default_str();
    gen_cmd->add_option("--k", gen.k, "top_k cutoff (default 40)");
    gen_cmd->add_option("--p", gen.p, "top_p nucleus mass (default 0.96)");
    gen_cmd->add_option("--temperature", gen.temperature, "Sampling temperature")->capture_default_str();
    gen_cmd->add_flag("--greedy", gen.greedy, "Greedy decoding");
    gen_cmd->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    gen_cmd->add_option("--workers", gen.build.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    add_backend_options(gen_cmd, gen.backend, false);
    gen_cmd->callback([&] { action = [&] { return run_gen_dataset(gen); }; });

    PerturbCmdArgs pert;
    auto* pert_cmd = app.add_subcommand("perturb", "Print perturbed variants of a text");
    pert_cmd->add_option("--input", pert.input, "Text file (default: stdin)");
    pert_cmd->add_option("--id", pert.id, "Original id")->capture_default_str();
    pert_cmd->add_option("--seed", pert.seed, "Seed")->capture_default_str();
    add_backend_options(pert_cmd, pert.backend, false);
    add_perturb_options(pert_cmd, pert.perturb, 50, "--n");
    pert_cmd->callback([&] { action = [&] { return run_perturb(pert); }; });

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train-toy", "Train the built-in n-gram model");
    train_cmd->add_option("--corpus", train.corpus, "Training text, one passage per line")->required();
    train_cmd->add_option("--out", train.out, "Model file to write")->required();
    train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
    train_cmd->add_option("--alpha", train.alpha, "Additive smoothing")->capture_default_str();
    train_cmd->add_option("--seed", train.seed, "Seed recorded in the model")->capture_default_str();
    train_cmd->callback([&] { action = [&] { return run_train(train); }; });

    CostArgs cost;
    auto* cost_cmd = app.add_subcommand("cost", "Estimated seconds per sample for a method");
    cost_cmd->add_option("--method", cost.method, "Detector")->required();
    cost_cmd->add_option("--n", cost.n, "Perturbations")->capture_default_str();
    cost_cmd->add_option("--t-p", cost.t_p, "Seconds per perturbation");
    cost_cmd->add_option("--t-m", cost.t_m, "Seconds per scoring pass");
    cost_cmd->add_option("--model", cost.model, "Scoring-model preset for t_m");
    cost_cmd->add_option("--perturber", cost.perturber, "Perturbation-model preset for t_p");
    cost_cmd->callback([&] { action = [&] { return run_cost(cost); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        std::cout << app.version() << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "detectllm: " << e.what() << '\n';
        if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front())
            std::cerr << "run 'detectllm " << sub->get_name() << " --help' for usage\n";
        return kUsage;
    }
    verbosity = verbose_count;

    try {
        return action();
    } catch (const UsageError& e) {
        std::cerr << "detectllm: " << e.what() << '\n';
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "detectllm: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "detectllm: malformed JSON: " << e.what() << '\n';
        return kUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "detectllm: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "detectllm: internal error: " << e.what() << '\n';
        return kInternal;
    }
}
