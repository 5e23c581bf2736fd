#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hare {

// Lowercase, split on any non-alphanumeric byte, drop empty segments.
// No stemming, no stopwords. Bytes outside ASCII alphanumerics are separators.
std::vector<std::string> tokenize(std::string_view text);

// Keep the first n whitespace-separated tokens, rejoined with single spaces.
std::string truncate_whitespace_tokens(std::string_view text, int n);

}  // namespace hare
