#include "detectllm/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "detectllm/error.hpp"

namespace detectllm {

namespace {
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
}  // namespace

std::vector<std::string> split_words(std::string_view text) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) words.emplace_back(text.substr(start, i - start));
    }
    return words;
}

std::string join_words(const std::vector<std::string>& words, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += sep;
        out += words[i];
    }
    return out;
}

std::string normalize_text(std::string_view text) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) fail(ErrorKind::InvariantViolation, "ICU NFC normaliser unavailable");
    const auto source = icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString composed = nfc->normalize(source, status);
    if (U_FAILURE(status)) fail(ErrorKind::ParseError, "text is not valid UTF-8");
    std::string utf8;
    composed.toUTF8String(utf8);
    return join_words(split_words(utf8));
}

}  // namespace detectllm
