#include "detectllm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include "detectllm/error.hpp"
#include "detectllm/parallel.hpp"
#include "detectllm/rng.hpp"
#include "detectllm/stats_io.hpp"

namespace detectllm {

double auroc(std::span<const double> machine_scores, std::span<const double> human_scores) {
    if (machine_scores.empty() || human_scores.empty())
        fail(ErrorKind::EmptyScoreList, "AUROC needs at least one machine and one human score");
    for (auto list : {machine_scores, human_scores}) {
        for (double v : list) {
            if (std::isnan(v)) fail(ErrorKind::InvalidArgument, "AUROC scores must not be NaN");
        }
    }

    struct Entry {
        double value;
        bool machine;
    };
    std::vector<Entry> all;
    all.reserve(machine_scores.size() + human_scores.size());
    for (double v : machine_scores) all.push_back({v, true});
    for (double v : human_scores) all.push_back({v, false});
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });

    // Twice the machine rank sum, with tied groups sharing their midrank.
    double twice_rank_sum = 0.0;
    for (std::size_t i = 0; i < all.size();) {
        std::size_t j = i;
        std::size_t machines = 0;
        while (j < all.size() && all[j].value == all[i].value) machines += all[j++].machine;
        // 1-based ranks i+1 .. j have midrank (i + 1 + j) / 2.
        twice_rank_sum += static_cast<double>(machines) * static_cast<double>(i + 1 + j);
        i = j;
    }
    const auto m = static_cast<double>(machine_scores.size());
    const auto h = static_cast<double>(human_scores.size());
    const double u = twice_rank_sum / 2.0 - m * (m + 1.0) / 2.0;
    return std::clamp(u / (m * h), 0.0, 1.0);
}

void CostModel::validate() const {
    if (!(t_p > 0.0) || !(t_m > 0.0) || !std::isfinite(t_p) || !std::isfinite(t_m))
        fail(ErrorKind::InvalidArgument, "t_p and t_m must be finite and > 0");
    if (n < 0) fail(ErrorKind::InvalidArgument, "perturbation count must be >= 0");
}

double estimate_cost(Method method, const CostModel& cm) {
    cm.validate();
    switch (method) {
        case Method::log_p:
        case Method::rank:
        case Method::log_rank:
        case Method::entropy: return cm.t_m;
        case Method::lrr: return 2.0 * cm.t_m;
        case Method::detect_gpt:
        case Method::npr: {
            const auto n = static_cast<double>(cm.n);
            return n * cm.t_p + (n + 1.0) * cm.t_m;
        }
    }
    return cm.t_m;
}

namespace {

constexpr TimingPreset kPerturberTimings[] = {
    {"t5-3b", 0.10},
    {"t5-large", 0.08},
    {"t5-base", 0.04},
    {"t5-small", 0.03},
};

constexpr TimingPreset kScorerTimings[] = {
    {"gpt2-xl", 0.06}, {"neo-2.7", 0.09}, {"opt-2.7", 0.10}, {"gpt-j", 0.04},
    {"opt-13", 0.07},  {"llama-13", 0.07}, {"neox", 0.60},
};

}  // namespace

std::span<const TimingPreset> perturber_timings() { return kPerturberTimings; }
std::span<const TimingPreset> scorer_timings() { return kScorerTimings; }

std::optional<double> find_timing(std::span<const TimingPreset> table, std::string_view name) {
    for (const auto& t : table) {
        if (t.name == name) return t.seconds;
    }
    return std::nullopt;
}

const MethodResult* BenchmarkReport::find(Method m) const {
    for (const auto& r : methods) {
        if (r.method == m) return &r;
    }
    return nullptr;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Everything computed for one side of one pair.
struct SideResult {
    bool ok = false;
    std::string error;
    std::vector<DetectorScore> scores;
    double scoring_seconds = 0.0;
    double perturb_seconds = 0.0;
    double perturbed_scoring_seconds = 0.0;
    std::size_t perturbations = 0;
};

/// Serialises access to a backend that declares itself single-session.
class BackendGate {
public:
    explicit BackendGate(Backend& backend) : backend_(backend), serial_(!backend.concurrent()) {}

    template <typename F>
    auto operator()(F&& f) {
        if (!serial_) return f(backend_);
        std::lock_guard lock(mutex_);
        return f(backend_);
    }

private:
    Backend& backend_;
    bool serial_;
    std::mutex mutex_;
};

SideResult score_side(const std::string& record_id, const std::string& text, const std::string& prompt,
                      BackendGate& scorer, BackendGate& filler, Backend& backend, const BenchmarkOptions& options,
                      bool want_perturbations) {
    SideResult out;
    try {
        std::size_t skip = 0;
        std::string prefix;
        std::string body = text;
        if (!options.score_prompt && !prompt.empty()) {
            skip = scorer([&](Backend& b) { return b.tokenize(prompt); }).size();
            if (text.compare(0, prompt.size(), prompt) == 0) {
                prefix = prompt;
                body = text.substr(prompt.size());
            }
        }
        auto score = [&](const std::string& t, const std::string& id) {
            TextStats s = scorer([&](Backend& b) { return score_text(b, t, id); });
            s = drop_leading(std::move(s), skip);
            if (s.tokens.empty()) fail(ErrorKind::TextTooShort, "'" + id + "' has no tokens after the prompt");
            return s;
        };

        auto start = Clock::now();
        const TextStats stats = score(text, record_id);
        out.scoring_seconds = seconds_since(start);

        std::vector<TextStats> perturbed;
        if (want_perturbations) {
            PerturbationConfig cfg = *options.perturbation;
            cfg.seed = derive_seed(cfg.seed, stable_hash(record_id));
            start = Clock::now();
            const PerturbationSet set = filler([&](Backend& b) { return perturb(body, cfg, &b, record_id); });
            out.perturb_seconds = seconds_since(start);
            start = Clock::now();
            for (std::size_t k = 0; k < set.variants.size(); ++k) {
                const std::string variant = prefix.empty() ? set.variants[k] : backend.join(prefix, set.variants[k]);
                perturbed.push_back(score(variant, StatsStore::perturbed_id(record_id, k)));
            }
            out.perturbed_scoring_seconds = seconds_since(start);
            out.perturbations = perturbed.size();
        }

        for (const Method m : options.methods) {
            out.scores.push_back(score_method(m, stats, perturbed, options.normalize_detect_gpt));
        }
        out.ok = true;
    } catch (const Error& e) {
        // Invariant violations are bugs or corrupt backends, not sample failures.
        if (e.kind() == ErrorKind::InvariantViolation) throw;
        out.error = e.what();
    }
    return out;
}

}  // namespace

BenchmarkReport run_benchmark(const std::vector<PairedSample>& pairs, Backend& backend,
                              const BenchmarkOptions& options, Backend* perturb_backend) {
    if (pairs.empty()) fail(ErrorKind::InvalidArgument, "benchmark needs at least one pair");
    if (options.methods.empty()) fail(ErrorKind::InvalidArgument, "benchmark needs at least one method");
    std::vector<Method> seen;
    for (const Method m : options.methods) {
        if (std::find(seen.begin(), seen.end(), m) != seen.end())
            fail(ErrorKind::InvalidArgument, "method '" + std::string(to_string(m)) + "' listed twice");
        seen.push_back(m);
    }
    const bool want_perturbations =
        std::any_of(options.methods.begin(), options.methods.end(), needs_perturbations);
    if (want_perturbations) {
        if (!options.perturbation)
            fail(ErrorKind::InvalidArgument, "perturbation-based methods need a perturbation configuration");
        options.perturbation->validate();
    }

    Backend& filler_backend = perturb_backend ? *perturb_backend : backend;
    BackendGate scorer(backend);
    BackendGate separate_filler(filler_backend);
    BackendGate& filler = &filler_backend == &backend ? scorer : separate_filler;

    struct PairResult {
        SideResult machine;
        SideResult human;
    };
    std::vector<PairResult> results(pairs.size());
    parallel_for(pairs.size(), options.workers, [&](std::size_t i) {
        const auto& p = pairs[i];
        results[i].machine = score_side(p.id + "/machine", p.machine_text, p.prompt, scorer, filler, backend, options,
                                        want_perturbations);
        results[i].human = score_side(p.id + "/human", p.human_text, p.prompt, scorer, filler, backend, options,
                                      want_perturbations);
    });

    BenchmarkReport report;
    report.dataset_id = options.dataset_id;
    report.backend_id = backend.id();
    report.pairs_total = pairs.size();
    report.perturbation = want_perturbations ? options.perturbation : std::nullopt;
    report.score_prompt = options.score_prompt;
    report.normalize_detect_gpt = options.normalize_detect_gpt;
    for (const auto& p : pairs) {
        // Seeds differ per sample; the snapshot keeps the distinct settings.
        DecodingConfig d = p.decoding;
        d.seed = 0;
        if (std::find(report.decodings.begin(), report.decodings.end(), d) == report.decodings.end())
            report.decodings.push_back(d);
    }
    for (const Method m : options.methods) {
        MethodResult mr;
        mr.method = m;
        report.methods.push_back(std::move(mr));
    }

    double scoring = 0.0, perturbing = 0.0, perturbed_scoring = 0.0;
    std::size_t scored_texts = 0, perturbations = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& r = results[i];
        if (!r.machine.ok || !r.human.ok) {
            ++report.pairs_dropped;
            report.drop_log.push_back(pairs[i].id + ": " + (r.machine.ok ? r.human.error : r.machine.error));
            continue;
        }
        report.pair_ids.push_back(pairs[i].id);
        for (std::size_t k = 0; k < options.methods.size(); ++k) {
            auto& mr = report.methods[k];
            mr.machine_scores.push_back(r.machine.scores[k].value);
            mr.human_scores.push_back(r.human.scores[k].value);
            mr.degenerate_count += r.machine.scores[k].degenerate + r.human.scores[k].degenerate;
        }
        for (const SideResult* side : {&r.machine, &r.human}) {
            scoring += side->scoring_seconds;
            perturbing += side->perturb_seconds;
            perturbed_scoring += side->perturbed_scoring_seconds;
            perturbations += side->perturbations;
            ++scored_texts;
        }
    }
    if (report.pair_ids.empty()) fail(ErrorKind::InsufficientCorpus, "every pair failed to score");

    for (auto& mr : report.methods) {
        mr.auroc = auroc(mr.machine_scores, mr.human_scores);
        mr.wall_clock_seconds = needs_perturbations(mr.method) ? scoring + perturbing + perturbed_scoring : scoring;
    }

    const auto texts = static_cast<double>(scored_texts);
    report.measured.t_m = scoring / texts;
    report.measured.n = want_perturbations ? options.perturbation->n : 0;
    report.measured.t_p = perturbations ? perturbing / static_cast<double>(perturbations) : 0.0;

    if (report.perturbation && report.perturbation->n == kAdvisoryPerturbations && report.find(Method::lrr) &&
        report.find(Method::npr)) {
        report.advisory = recommend_method(report);
    }
    return report;
}

Method recommend_method(double lrr_auroc, double npr_auroc) {
    return lrr_auroc >= npr_auroc ? Method::lrr : Method::npr;
}

Method recommend_method(const BenchmarkReport& report_at_n10) {
    const MethodResult* l = report_at_n10.find(Method::lrr);
    const MethodResult* n = report_at_n10.find(Method::npr);
    if (!l || !n) fail(ErrorKind::MissingMethod, "recommendation needs AUROC for both lrr and npr");
    if (!report_at_n10.perturbation || report_at_n10.perturbation->n != kAdvisoryPerturbations)
        fail(ErrorKind::InvalidArgument, "recommendation must be taken with 10 perturbations");
    return recommend_method(l->auroc, n->auroc);
}

nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timing) {
    nlohmann::json aurocs = nlohmann::json::object();
    nlohmann::json degenerate = nlohmann::json::object();
    nlohmann::json order = nlohmann::json::array();
    for (const auto& mr : report.methods) {
        const std::string name(to_string(mr.method));
        aurocs[name] = mr.auroc;
        degenerate[name] = mr.degenerate_count;
        order.push_back(name);
    }
    nlohmann::json decodings = nlohmann::json::array();
    for (const auto& d : report.decodings) {
        auto dj = decoding_to_json(d);
        dj.erase("seed");
        decodings.push_back(std::move(dj));
    }

    nlohmann::json perturbation = nullptr;
    if (report.perturbation) {
        const auto& p = *report.perturbation;
        perturbation = {{"n", p.n},
                        {"mask_fraction", p.mask_fraction},
                        {"span_length", p.span_length},
                        {"policy", to_string(p.policy)},
                        {"seed", p.seed}};
    }

    nlohmann::json advisory = nullptr;
    if (report.advisory) {
        advisory = {{"recommended", to_string(*report.advisory)},
                    {"n_perturbations", kAdvisoryPerturbations},
                    {"rule", "prefer lrr unless npr has strictly higher AUROC at 10 perturbations"}};
    }

    nlohmann::json j = {{"dataset_id", report.dataset_id},
                        {"backend_id", report.backend_id},
                        {"methods", order},
                        {"auroc", aurocs},
                        {"degenerate_scores", degenerate},
                        {"pairs_total", report.pairs_total},
                        {"pairs_used", report.pair_ids.size()},
                        {"pairs_dropped", report.pairs_dropped},
                        {"drop_log", report.drop_log},
                        {"config",
                         {{"decoding", decodings},
                          {"perturbation", perturbation},
                          {"score_prompt", report.score_prompt},
                          {"normalize_detect_gpt", report.normalize_detect_gpt}}},
                        {"advisory", advisory}};
    if (include_timing) j["timing"] = timing_to_json(report);
    return j;
}

nlohmann::json timing_to_json(const BenchmarkReport& report) {
    nlohmann::json wall = nlohmann::json::object();
    nlohmann::json estimate = nlohmann::json::object();
    const bool calibrated = report.measured.t_m > 0.0;
    for (const auto& mr : report.methods) {
        const std::string name(to_string(mr.method));
        wall[name] = mr.wall_clock_seconds;
        if (calibrated) {
            CostModel cm = report.measured;
            if (!(cm.t_p > 0.0)) cm.t_p = std::numeric_limits<double>::min();
            // Per-sample estimate from the measured inputs.
            estimate[name] = estimate_cost(mr.method, cm);
        }
    }
    return {{"wall_clock_seconds", wall},
            {"measured_cost_model", {{"t_p", report.measured.t_p}, {"t_m", report.measured.t_m}, {"n", report.measured.n}}},
            {"estimated_seconds_per_sample", estimate}};
}

std::string report_table(const BenchmarkReport& report) {
    std::ostringstream out;
    std::vector<std::string> header = {"Dataset"};
    for (const auto& mr : report.methods) header.emplace_back(to_string(mr.method));
    std::vector<std::string> row = {report.dataset_id};
    for (const auto& mr : report.methods) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", mr.auroc);
        row.emplace_back(buf);
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max(header[i].size(), row[i].size());
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << "  ";
            out << cells[i] << std::string(width[i] - cells[i].size(), ' ');
        }
        out << '\n';
    };
    out << "AUROC, backend " << report.backend_id << ", " << report.pair_ids.size() << " pairs";
    if (report.pairs_dropped) out << " (" << report.pairs_dropped << " dropped)";
    out << '\n';
    emit(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    emit(row);
    if (report.advisory) out << "recommended at n=10: " << to_string(*report.advisory) << '\n';
    return out.str();
}

std::string scores_csv(const BenchmarkReport& report) {
    std::ostringstream out;
    out << "pair_id,label,method,score\n";
    char buf[40];
    for (const auto& mr : report.methods) {
        for (std::size_t i = 0; i < report.pair_ids.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", mr.machine_scores[i]);
            out << report.pair_ids[i] << ",machine," << to_string(mr.method) << ',' << buf << '\n';
            std::snprintf(buf, sizeof buf, "%.17g", mr.human_scores[i]);
            out << report.pair_ids[i] << ",human," << to_string(mr.method) << ',' << buf << '\n';
        }
    }
    return out.str();
}

}  // namespace detectllm
