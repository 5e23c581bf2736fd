#pragma once

#include <optional>
#include <string>

#include "hare/types.hpp"

namespace hare {

// Parse a query string into base terms and operator clauses.
// Whitespace-separated chunks: "+term" is a must clause, "-term" a must-not
// clause, "term^f" a boost clause (f > 0); anything else contributes base
// terms. Clause chunks are run through the tokenizer; the first token becomes
// the clause term, any extra tokens fall back to base terms.
StructuredQuery parse_query(std::string_view text);

// Inverse-direction rendering: base terms then clauses, in stored order,
// separated by single spaces ("what is x +temperatures -java around^8").
// restrict_ids is a retrieval mechanism and is not rendered.
std::string render_query(const StructuredQuery& q);

// Refinement text forms: "term", "+term", "-term", "term^8".
std::string render_refinement(const Refinement& r);

// Strict single-token refinement parser used for model output. Returns
// nullopt on empty or unparseable text (multi-token term, bad factor).
std::optional<Refinement> parse_refinement(std::string_view text);

// Value-semantic application: TERM appends to base terms (disjunctive),
// PLUS/MINUS/BOOST append a clause. Duplicates are appended verbatim.
StructuredQuery apply_refinement(const StructuredQuery& q, const Refinement& r);

// True if term occurs among base terms or any clause term.
bool query_contains_term(const StructuredQuery& q, const std::string& term);

}  // namespace hare
