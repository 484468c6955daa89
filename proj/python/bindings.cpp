#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "detectllm/datagen.hpp"
#include "detectllm/detectors.hpp"
#include "detectllm/error.hpp"
#include "detectllm/eval.hpp"
#include "detectllm/http_backend.hpp"
#include "detectllm/perturber.hpp"
#include "detectllm/stats_io.hpp"
#include "detectllm/toy_model.hpp"

namespace py = pybind11;
using namespace detectllm;

namespace {

std::vector<PairedSample> pairs_from_dicts(const std::vector<std::string>& json_lines) {
    std::vector<PairedSample> pairs;
    pairs.reserve(json_lines.size());
    for (const auto& line : json_lines) pairs.push_back(pair_from_json(nlohmann::json::parse(line)));
    return pairs;
}

}  // namespace

PYBIND11_MODULE(_detectllm, m) {
    m.doc() = "Zero-shot machine-generated text detection: native core";

    static py::exception<Error> error_type(m, "DetectLLMError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = static_cast<const py::object&>(error_type)(e.what());
            exc.attr("kind") = std::string(to_string(e.kind()));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    m.attr("DEGENERATE_MAX") = kDegenerateMax;

    py::enum_<Method>(m, "Method")
        .value("log_p", Method::log_p)
        .value("rank", Method::rank)
        .value("log_rank", Method::log_rank)
        .value("entropy", Method::entropy)
        .value("lrr", Method::lrr)
        .value("detect_gpt", Method::detect_gpt)
        .value("npr", Method::npr);
    m.def("parse_method", &parse_method, py::arg("name"));
    m.def("method_name", [](Method mth) { return std::string(to_string(mth)); });
    m.def("needs_perturbations", &needs_perturbations);

    py::class_<TokenStats>(m, "TokenStats")
        .def(py::init([](std::string token, double log_prob, std::int64_t rank, double entropy) {
                 return TokenStats{std::move(token), log_prob, rank, entropy};
             }),
             py::arg("token"), py::arg("log_prob"), py::arg("rank"), py::arg("entropy"))
        .def_readwrite("token", &TokenStats::token)
        .def_readwrite("log_prob", &TokenStats::log_prob)
        .def_readwrite("rank", &TokenStats::rank)
        .def_readwrite("entropy", &TokenStats::entropy)
        .def("__repr__", [](const TokenStats& t) {
            return "TokenStats(" + t.token + ", log_prob=" + std::to_string(t.log_prob) +
                   ", rank=" + std::to_string(t.rank) + ", entropy=" + std::to_string(t.entropy) + ")";
        });

    py::class_<TextStats>(m, "TextStats")
        .def(py::init<>())
        .def(py::init([](std::vector<TokenStats> tokens, std::int64_t vocab_size, std::string id) {
                 TextStats s;
                 s.tokens = std::move(tokens);
                 s.vocab_size = vocab_size;
                 s.id = std::move(id);
                 validate(s);
                 return s;
             }),
             py::arg("tokens"), py::arg("vocab_size"), py::arg("id") = "")
        .def_readwrite("id", &TextStats::id)
        .def_readwrite("tokens", &TextStats::tokens)
        .def_readwrite("scored_from", &TextStats::scored_from)
        .def_readwrite("backend_id", &TextStats::backend_id)
        .def_readwrite("vocab_size", &TextStats::vocab_size)
        .def_readwrite("truncated_from", &TextStats::truncated_from)
        .def("__len__", &TextStats::size)
        .def("to_json", [](const TextStats& s) { return stats_to_json(s).dump(); });
    m.def("stats_from_json", [](const std::string& text) {
        auto s = stats_from_json(nlohmann::json::parse(text));
        validate(s);
        return s;
    });

    py::class_<DetectorScore>(m, "DetectorScore")
        .def_readonly("method", &DetectorScore::method)
        .def_readonly("value", &DetectorScore::value)
        .def_readonly("degenerate", &DetectorScore::degenerate)
        .def_readonly("n_perturbations_used", &DetectorScore::n_perturbations_used);

    m.def(
        "score_method",
        [](Method method, const TextStats& stats, const std::vector<TextStats>& perturbed, bool normalize) {
            return score_method(method, stats, perturbed, normalize);
        },
        py::arg("method"), py::arg("stats"),
          py::arg("perturbed") = std::vector<TextStats>{}, py::arg("normalize_detect_gpt") = false);
    m.def("auroc", [](const std::vector<double>& machine, const std::vector<double>& human) {
        return auroc(machine, human);
    });
    m.def(
        "estimate_cost",
        [](Method method, double t_p, double t_m, std::int64_t n) { return estimate_cost(method, {t_p, t_m, n}); },
        py::arg("method"), py::arg("t_p"), py::arg("t_m"), py::arg("n") = 0);
    m.def("recommend_method", py::overload_cast<double, double>(&recommend_method), py::arg("lrr_auroc"),
          py::arg("npr_auroc"));

    py::enum_<Strategy>(m, "Strategy")
        .value("temperature", Strategy::temperature)
        .value("top_k", Strategy::top_k)
        .value("top_p", Strategy::top_p);

    py::class_<DecodingConfig>(m, "DecodingConfig")
        .def(py::init([](Strategy strategy, double temperature, std::optional<std::int64_t> k,
                         std::optional<double> p, std::uint64_t seed, bool greedy) {
                 DecodingConfig c{strategy, temperature, k, p, seed, greedy};
                 c.validate();
                 return c;
             }),
             py::arg("strategy") = Strategy::temperature, py::arg("temperature") = 1.0, py::arg("k") = py::none(),
             py::arg("p") = py::none(), py::arg("seed") = 0, py::arg("greedy") = false)
        .def_readwrite("strategy", &DecodingConfig::strategy)
        .def_readwrite("temperature", &DecodingConfig::temperature)
        .def_readwrite("k", &DecodingConfig::k)
        .def_readwrite("p", &DecodingConfig::p)
        .def_readwrite("seed", &DecodingConfig::seed)
        .def_readwrite("greedy", &DecodingConfig::greedy);

    py::enum_<PerturbPolicy>(m, "PerturbPolicy")
        .value("mask_fill_backend", PerturbPolicy::mask_fill_backend)
        .value("lexical_local", PerturbPolicy::lexical_local);

    py::class_<PerturbationConfig>(m, "PerturbationConfig")
        .def(py::init([](std::int64_t n, double mask_fraction, std::int64_t span_length, PerturbPolicy policy,
                         std::uint64_t seed) {
                 PerturbationConfig c{n, mask_fraction, span_length, policy, seed};
                 c.validate();
                 return c;
             }),
             py::arg("n") = 50, py::arg("mask_fraction") = 0.15, py::arg("span_length") = 2,
             py::arg("policy") = PerturbPolicy::lexical_local, py::arg("seed") = 0)
        .def_readwrite("n", &PerturbationConfig::n)
        .def_readwrite("mask_fraction", &PerturbationConfig::mask_fraction)
        .def_readwrite("span_length", &PerturbationConfig::span_length)
        .def_readwrite("policy", &PerturbationConfig::policy)
        .def_readwrite("seed", &PerturbationConfig::seed);

    py::class_<Backend>(m, "Backend")
        .def_property_readonly("id", &Backend::id)
        .def("score", &Backend::score, py::arg("text"), py::call_guard<py::gil_scoped_release>())
        .def("generate", &Backend::generate, py::arg("prompt"), py::arg("max_tokens"), py::arg("decoding"),
             py::call_guard<py::gil_scoped_release>())
        .def("tokenize", &Backend::tokenize, py::arg("text"))
        .def("detokenize", &Backend::detokenize, py::arg("tokens"))
        .def("set_max_scored_tokens", &Backend::set_max_scored_tokens);

    py::class_<ToyModel, std::shared_ptr<ToyModel>>(m, "ToyModel")
        .def_static(
            "train",
            [](const std::vector<std::string>& corpus, int order, double alpha, std::uint64_t seed) {
                return std::make_shared<ToyModel>(ToyModel::train(corpus, order, alpha, seed));
            },
            py::arg("corpus"), py::arg("order") = 3, py::arg("alpha") = 0.01, py::arg("seed") = 0)
        .def_static("load", [](const std::string& path) { return std::make_shared<ToyModel>(ToyModel::load(path)); })
        .def_static("from_json",
                    [](const std::string& text) { return std::make_shared<ToyModel>(ToyModel::from_json(text)); })
        .def("save", &ToyModel::save)
        .def("to_json", &ToyModel::to_json)
        .def_property_readonly("order", &ToyModel::order)
        .def_property_readonly("alpha", &ToyModel::alpha)
        .def_property_readonly("vocab_size", &ToyModel::vocab_size)
        .def_property_readonly("vocabulary", &ToyModel::vocabulary);

    py::class_<ToyBackend, Backend>(m, "ToyBackend")
        .def(py::init([](std::shared_ptr<ToyModel> model, std::string id) {
                 return std::make_unique<ToyBackend>(std::move(model), std::move(id));
             }),
             py::arg("model"), py::arg("id") = "toy");

    py::class_<HttpBackend, Backend>(m, "HttpBackend")
        .def(py::init([](std::string url, std::string id, double timeout) {
                 return std::make_unique<HttpBackend>(HttpBackend::Options{std::move(url), std::move(id), timeout, true});
             }),
             py::arg("url"), py::arg("id") = "http", py::arg("timeout") = 120.0);

    m.def(
        "perturb",
        [](const std::string& text, const PerturbationConfig& cfg, Backend* backend) {
            py::gil_scoped_release release;
            return perturb(text, cfg, backend).variants;
        },
        py::arg("text"), py::arg("config"), py::arg("backend") = nullptr);

    m.def(
        "_build_pairs",
        [](const std::vector<std::string>& texts, Backend& backend, const DecodingConfig& cfg,
           std::size_t prompt_tokens, std::size_t n_pairs, std::size_t min_len, std::size_t max_new_tokens,
           std::uint64_t seed, std::size_t workers) {
            BuildOptions o;
            o.prompt_tokens = prompt_tokens;
            o.n_pairs = n_pairs;
            o.min_len = min_len;
            o.max_new_tokens = max_new_tokens;
            o.seed = seed;
            o.workers = workers;
            Dataset d;
            {
                py::gil_scoped_release release;
                d = build_pairs(texts, backend, cfg, o);
            }
            std::vector<std::string> lines;
            for (const auto& p : d.pairs) lines.push_back(pair_to_json(p).dump());
            return py::make_tuple(lines, metadata_to_json(d.metadata).dump());
        });

    m.def("_run_benchmark",
          [](const std::vector<std::string>& pair_lines, Backend& backend, const std::vector<Method>& methods,
             std::optional<PerturbationConfig> perturbation, bool score_prompt, bool normalize_detect_gpt,
             std::size_t workers, const std::string& dataset_id) {
              BenchmarkOptions o;
              o.methods = methods;
              o.perturbation = perturbation;
              o.score_prompt = score_prompt;
              o.normalize_detect_gpt = normalize_detect_gpt;
              o.workers = workers;
              o.dataset_id = dataset_id;
              const auto pairs = pairs_from_dicts(pair_lines);
              BenchmarkReport r;
              {
                  py::gil_scoped_release release;
                  r = run_benchmark(pairs, backend, o);
              }
              return py::make_tuple(report_to_json(r).dump(), scores_csv(r));
          });
}
