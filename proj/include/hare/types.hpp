#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hare {

struct Document {
    std::string id;
    std::string title;
    std::string text;
    int length = 0;  // token count of the indexed field (title joined with text)
};

enum class Source { Sparse, Dense };

// original_depth: 1-based rank in the source retriever's ranking for the
// session's initial query, or kUnknownDepth when the doc never appeared there.
constexpr int kUnknownDepth = 0;

struct ScoredDoc {
    std::string id;
    double score = 0.0;
    Source source = Source::Sparse;
    int original_depth = kUnknownDepth;
};

enum class ClauseOp { Must, MustNot, Boost };

struct Clause {
    ClauseOp op;
    std::string term;
    double boost = 1.0;  // > 0, used by Boost only
};

struct StructuredQuery {
    std::vector<std::string> base_terms;
    std::vector<Clause> clauses;
    // When set, retrieval is restricted to this id set (frozen sub-collection).
    std::optional<std::set<std::string>> restrict_ids;
};

enum class RefinementOp { Term, Plus, Minus, Boost };

struct Refinement {
    RefinementOp op;
    std::string term;
    double boost = 1.0;
};

struct QueryRecord {
    std::string id;
    std::string text;
};

}  // namespace hare
