#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace detectllm {

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view text);

std::string join_words(const std::vector<std::string>& words, std::string_view sep = " ");

/// Unicode NFC followed by whitespace collapse and trim.
std::string normalize_text(std::string_view text);

}  // namespace detectllm
