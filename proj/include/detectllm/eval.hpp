#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "detectllm/backend.hpp"
#include "detectllm/datagen.hpp"
#include "detectllm/detectors.hpp"
#include "detectllm/perturber.hpp"

namespace detectllm {

/// Probability that a machine score exceeds a human score, ties counted as
/// one half. Computed from midranks in O((m + h) log(m + h)).
double auroc(std::span<const double> machine_scores, std::span<const double> human_scores);

/// Runtime inputs: seconds per perturbation, seconds per single-statistic
/// pass of the scoring model, and the perturbation count.
struct CostModel {
    double t_p = 0.0;
    double t_m = 0.0;
    std::int64_t n = 0;

    void validate() const;
};

/// t_m for the single-statistic methods, 2 t_m for LRR and
/// n t_p + (n + 1) t_m for the perturbation-based ones.
double estimate_cost(Method method, const CostModel& cm);

/// Reference per-component timings (seconds) measured on A100 hardware.
struct TimingPreset {
    std::string_view name;
    double seconds;
};
std::span<const TimingPreset> perturber_timings();  // t_p
std::span<const TimingPreset> scorer_timings();     // t_m
std::optional<double> find_timing(std::span<const TimingPreset> table, std::string_view name);

struct BenchmarkOptions {
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::optional<PerturbationConfig> perturbation;
    /// When false, the prompt tokens shared by both sides are not scored and
    /// perturbations touch only the continuation.
    bool score_prompt = false;
    bool normalize_detect_gpt = false;
    std::size_t workers = 1;
    std::string dataset_id = "dataset";
};

struct MethodResult {
    Method method = Method::log_p;
    double auroc = 0.5;
    std::vector<double> machine_scores;
    std::vector<double> human_scores;
    std::size_t degenerate_count = 0;
    double wall_clock_seconds = 0.0;
};

struct BenchmarkReport {
    std::string dataset_id;
    std::string backend_id;
    std::vector<MethodResult> methods;
    std::vector<std::string> pair_ids;
    std::size_t pairs_total = 0;
    std::size_t pairs_dropped = 0;
    std::vector<std::string> drop_log;
    std::vector<DecodingConfig> decodings;
    std::optional<PerturbationConfig> perturbation;
    bool score_prompt = false;
    bool normalize_detect_gpt = false;
    std::optional<Method> advisory;
    /// Cost inputs measured during the run (wall clock, not reproducible).
    CostModel measured;

    const MethodResult* find(Method m) const;
};

/// Scores both sides of every pair with every requested method. Stats and
/// perturbation sets are computed once per text and shared between methods.
/// A pair is dropped (both sides) when either side fails.
/// `perturb_backend` serves the mask_fill_backend policy; it defaults to `backend`.
BenchmarkReport run_benchmark(const std::vector<PairedSample>& pairs, Backend& backend,
                              const BenchmarkOptions& options, Backend* perturb_backend = nullptr);

/// Perturbation count at which the LRR-vs-NPR decision is taken.
inline constexpr std::int64_t kAdvisoryPerturbations = 10;

/// LRR unless NPR is strictly better; ties go to the cheaper LRR.
Method recommend_method(double lrr_auroc, double npr_auroc);
/// Requires both methods in the report and a perturbation count of 10.
Method recommend_method(const BenchmarkReport& report_at_n10);

/// `include_timing` adds the wall-clock fields, which vary run to run.
nlohmann::json report_to_json(const BenchmarkReport& report, bool include_timing = false);
nlohmann::json timing_to_json(const BenchmarkReport& report);
std::string report_table(const BenchmarkReport& report);
std::string scores_csv(const BenchmarkReport& report);

}  // namespace detectllm
