#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace detectllm {

enum class ErrorKind {
    BackendUnavailable,
    TextTooShort,
    VocabMismatch,
    ParseError,
    InvariantViolation,
    EmptyCorpus,
    UnsupportedStrategy,
    FillFailure,
    EmptyStats,
    NoPerturbations,
    EmptyScoreList,
    MissingMethod,
    InsufficientCorpus,
    InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the toolkit carries a kind so callers (the CLI in
/// particular) can map it onto an exit code without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace detectllm
