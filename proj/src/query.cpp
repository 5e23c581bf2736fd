#include "hare/query.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "hare/tokenize.hpp"

namespace hare {

namespace {

std::string format_factor(double f) {
    char buf[32];
    if (f == static_cast<long long>(f))
        std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(f));
    else
        std::snprintf(buf, sizeof(buf), "%g", f);
    return buf;
}

// Splits "term^8" at the last caret. Returns false if there is no caret or
// the factor does not parse to a positive finite number.
bool split_boost(std::string_view chunk, std::string_view& term, double& factor) {
    size_t caret = chunk.rfind('^');
    if (caret == std::string_view::npos || caret == 0 || caret + 1 >= chunk.size())
        return false;
    std::string tail(chunk.substr(caret + 1));
    char* end = nullptr;
    double f = std::strtod(tail.c_str(), &end);
    if (end == tail.c_str() || *end != '\0' || !(f > 0) || !std::isfinite(f))
        return false;
    term = chunk.substr(0, caret);
    factor = f;
    return true;
}

}  // namespace

StructuredQuery parse_query(std::string_view text) {
    StructuredQuery q;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= text.size()) break;
        size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        std::string_view chunk = text.substr(i, j - i);
        i = j;

        std::optional<ClauseOp> op;
        double factor = 1.0;
        std::string_view body = chunk;
        std::string_view boost_term;
        if (chunk.size() > 1 && chunk[0] == '+') {
            op = ClauseOp::Must;
            body = chunk.substr(1);
        } else if (chunk.size() > 1 && chunk[0] == '-') {
            op = ClauseOp::MustNot;
            body = chunk.substr(1);
        } else if (split_boost(chunk, boost_term, factor)) {
            op = ClauseOp::Boost;
            body = boost_term;
        }

        auto toks = tokenize(body);
        if (toks.empty()) continue;
        if (op) {
            q.clauses.push_back({*op, toks[0], factor});
            for (size_t t = 1; t < toks.size(); ++t) q.base_terms.push_back(toks[t]);
        } else {
            for (auto& t : toks) q.base_terms.push_back(std::move(t));
        }
    }
    return q;
}

std::string render_query(const StructuredQuery& q) {
    std::string out;
    for (const auto& t : q.base_terms) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    for (const auto& c : q.clauses) {
        if (!out.empty()) out.push_back(' ');
        switch (c.op) {
            case ClauseOp::Must: out += "+" + c.term; break;
            case ClauseOp::MustNot: out += "-" + c.term; break;
            case ClauseOp::Boost: out += c.term + "^" + format_factor(c.boost); break;
        }
    }
    return out;
}

std::string render_refinement(const Refinement& r) {
    switch (r.op) {
        case RefinementOp::Term: return r.term;
        case RefinementOp::Plus: return "+" + r.term;
        case RefinementOp::Minus: return "-" + r.term;
        case RefinementOp::Boost: return r.term + "^" + format_factor(r.boost);
    }
    throw std::logic_error("bad refinement op");
}

std::optional<Refinement> parse_refinement(std::string_view text) {
    // trim
    size_t a = 0, b = text.size();
    while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
    text = text.substr(a, b - a);
    if (text.empty()) return std::nullopt;

    RefinementOp op = RefinementOp::Term;
    double factor = 1.0;
    std::string_view body = text;
    std::string_view boost_term;
    if (text[0] == '+') {
        op = RefinementOp::Plus;
        body = text.substr(1);
    } else if (text[0] == '-') {
        op = RefinementOp::Minus;
        body = text.substr(1);
    } else if (split_boost(text, boost_term, factor)) {
        op = RefinementOp::Boost;
        body = boost_term;
    }
    auto toks = tokenize(body);
    if (toks.size() != 1) return std::nullopt;
    return Refinement{op, toks[0], factor};
}

StructuredQuery apply_refinement(const StructuredQuery& q, const Refinement& r) {
    if (r.op == RefinementOp::Boost && !(r.boost > 0))
        throw std::invalid_argument("boost factor must be positive");
    StructuredQuery out = q;
    switch (r.op) {
        case RefinementOp::Term: out.base_terms.push_back(r.term); break;
        case RefinementOp::Plus: out.clauses.push_back({ClauseOp::Must, r.term, 1.0}); break;
        case RefinementOp::Minus: out.clauses.push_back({ClauseOp::MustNot, r.term, 1.0}); break;
        case RefinementOp::Boost: out.clauses.push_back({ClauseOp::Boost, r.term, r.boost}); break;
    }
    return out;
}

bool query_contains_term(const StructuredQuery& q, const std::string& term) {
    for (const auto& t : q.base_terms)
        if (t == term) return true;
    for (const auto& c : q.clauses)
        if (c.term == term) return true;
    return false;
}

}  // namespace hare
