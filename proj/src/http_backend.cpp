#include "detectllm/http_backend.hpp"

#include <cstdlib>

#include <httplib.h>
#include <json.hpp>

#include "detectllm/error.hpp"
#include "detectllm/stats_io.hpp"

namespace detectllm {

namespace {

nlohmann::json parse_response(const std::string& body, const std::string& path) {
    try {
        return nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, "malformed response from " + path + ": " + e.what());
    }
}

}  // namespace

HttpBackend::HttpBackend(Options options) : options_(std::move(options)) {
    const std::string& url = options_.url;
    const auto scheme_end = url.find("://");
    if (url.empty() || scheme_end == std::string::npos)
        fail(ErrorKind::InvalidArgument, "backend URL must look like http://host:port, got '" + url + "'");
    if (url.compare(0, scheme_end, "http") != 0)
        fail(ErrorKind::InvalidArgument, "only plain http:// backend URLs are supported");
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        base_path_ = url.substr(path_start);
        while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
    }
}

std::optional<std::string> HttpBackend::url_from_env() {
    const char* v = std::getenv(kBackendUrlEnv);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
}

std::string HttpBackend::post(const std::string& path, const std::string& body) const {
    httplib::Client client(scheme_host_port_);
    const auto secs = static_cast<time_t>(options_.timeout_seconds);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    const std::string full = base_path_ + path;
    auto res = client.Post(full, body, "application/json");
    if (!res) {
        fail(ErrorKind::BackendUnavailable,
             "POST " + scheme_host_port_ + full + " failed: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        fail(ErrorKind::BackendUnavailable,
             "POST " + scheme_host_port_ + full + " returned HTTP " + std::to_string(res->status));
    }
    return res->body;
}

TextStats HttpBackend::score(std::string_view text) {
    const auto reply = parse_response(post("/v1/score", nlohmann::json{{"text", text}}.dump()), "/v1/score");
    TextStats s;
    s.backend_id = options_.id;
    s.scored_from = 1;
    try {
        s.vocab_size = reply.at("vocab_size").get<std::int64_t>();
        for (const auto& t : reply.at("tokens")) s.tokens.push_back(token_from_json(t));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("malformed /v1/score response: ") + e.what());
    }
    if (s.tokens.size() < 2) fail(ErrorKind::TextTooShort, "text has fewer than 2 tokens");
    if (s.tokens.size() > max_scored_tokens_) {
        s.truncated_from = static_cast<std::int64_t>(s.tokens.size());
        s.tokens.resize(max_scored_tokens_);
    }
    validate(s);
    return s;
}

std::string HttpBackend::generate(std::string_view prompt, std::int64_t max_tokens, const DecodingConfig& cfg) {
    cfg.validate();
    if (prompt.empty()) fail(ErrorKind::InvalidArgument, "prompt must be non-empty");
    if (max_tokens < 1) fail(ErrorKind::InvalidArgument, "max_tokens must be >= 1");
    // The wire protocol has no greedy flag; top-1 sampling is equivalent.
    const DecodingConfig wire = cfg.greedy ? DecodingConfig::top_k_sampling(1, cfg.seed) : cfg;
    const nlohmann::json body = {{"prompt", prompt}, {"max_tokens", max_tokens}, {"decoding", decoding_to_json(wire)}};
    const auto reply = parse_response(post("/v1/generate", body.dump()), "/v1/generate");
    try {
        return reply.at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("malformed /v1/generate response: ") + e.what());
    }
}

std::vector<std::string> HttpBackend::tokenize(std::string_view text) {
    const auto reply = parse_response(post("/v1/score", nlohmann::json{{"text", text}}.dump()), "/v1/score");
    std::vector<std::string> out;
    try {
        for (const auto& t : reply.at("tokens")) out.push_back(t.at("token").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("malformed /v1/score response: ") + e.what());
    }
    return out;
}

std::string HttpBackend::detokenize(const std::vector<std::string>& tokens) const {
    std::string out;
    for (const auto& t : tokens) out += t;
    return out;
}

std::vector<std::string> HttpBackend::mask_fill(const PerturbRequest& request) {
    if (!options_.mask_fill) return Backend::mask_fill(request);
    const nlohmann::json body = {{"text", request.text},
                                 {"n", request.n},
                                 {"mask_fraction", request.mask_fraction},
                                 {"span_length", request.span_length},
                                 {"seed", request.seed}};
    const auto reply = parse_response(post("/v1/perturb", body.dump()), "/v1/perturb");
    try {
        return reply.at("perturbations").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::ParseError, std::string("malformed /v1/perturb response: ") + e.what());
    }
}

}  // namespace detectllm
