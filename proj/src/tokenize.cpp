#include "hare/tokenize.hpp"

#include <cctype>

namespace hare {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::string truncate_whitespace_tokens(std::string_view text, int n) {
    std::string out;
    int kept = 0;
    size_t i = 0;
    while (i < text.size() && kept < n) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        if (!out.empty()) out.push_back(' ');
        out.append(text.substr(i, j - i));
        ++kept;
        i = j;
    }
    return out;
}

}  // namespace hare
