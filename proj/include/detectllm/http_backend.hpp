#pragma once

#include <optional>
#include <string>

#include "detectllm/backend.hpp"

namespace detectllm {

/// Environment variable naming the default HTTP endpoint.
inline constexpr const char* kBackendUrlEnv = "DETECTLLM_BACKEND_URL";

/// Client for a remote scoring server speaking the /v1/score, /v1/generate
/// and /v1/perturb JSON protocol. Every request opens its own connection, so
/// one handle is safe to share between workers.
class HttpBackend final : public Backend {
public:
    struct Options {
        std::string url;
        std::string id = "http";
        double timeout_seconds = 120.0;
        bool mask_fill = true;
    };

    explicit HttpBackend(Options options);

    /// URL from DETECTLLM_BACKEND_URL, if set and non-empty.
    static std::optional<std::string> url_from_env();

    std::string id() const override { return options_.id; }
    TextStats score(std::string_view text) override;
    std::string generate(std::string_view prompt, std::int64_t max_tokens, const DecodingConfig& cfg) override;
    std::vector<std::string> tokenize(std::string_view text) override;
    std::string detokenize(const std::vector<std::string>& tokens) const override;
    bool supports_mask_fill() const override { return options_.mask_fill; }
    std::vector<std::string> mask_fill(const PerturbRequest& request) override;

private:
    std::string post(const std::string& path, const std::string& body) const;

    Options options_;
    std::string scheme_host_port_;
    std::string base_path_;
};

}  // namespace detectllm
