#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hare/dense.hpp"
#include "hare/evaluation.hpp"
#include "hare/index.hpp"
#include "hare/scoring.hpp"
#include "hare/types.hpp"

namespace hare {

enum class EnvKind { Bm25, Dense, Hybrid };

EnvKind env_kind_from_string(const std::string& s);
std::string to_string(EnvKind k);

// Union of a then b, deduplicated by doc id; the first occurrence keeps its
// score, source and depth metadata. |result| <= |a| + |b|.
std::vector<ScoredDoc> hybrid_join(const std::vector<ScoredDoc>& a,
                                   const std::vector<ScoredDoc>& b);

// One-shot retrieval environment. dense/embedder may be null for Bm25.
struct Environment {
    EnvKind kind = EnvKind::Hybrid;
    const InvertedIndex* sparse = nullptr;
    const DenseIndex* dense = nullptr;
    const Embedder* embedder = nullptr;
};

// Candidate pool for a query: BM25 top-k, dense top-k (the vector query is
// the rendered query text, so operator sigils vanish in tokenization), or
// their hybrid join.
std::vector<ScoredDoc> retrieve(const Environment& env, const StructuredQuery& q, int k);

// Reorders candidates by scorer value descending, ties by ascending doc id.
// Every candidate is retained. Scorer failures carry the doc id.
std::vector<ScoredDoc> rerank(Scorer& scorer, const std::string& query_text,
                              std::vector<ScoredDoc> candidates, const InvertedIndex& corpus);

struct SweepRow {
    int k = 0;
    double mean_ndcg10 = 0.0;
    int num_queries = 0;
};

// retrieve-then-rerank nDCG@10 per depth; queries without qrels are
// excluded and counted. make_scorer builds the per-query scorer.
struct SweepResult {
    std::vector<SweepRow> rows;
    int skipped_no_qrels = 0;
};

using ScorerFactory = std::function<std::unique_ptr<Scorer>(const std::string& query_id)>;

SweepResult depth_sweep(const Environment& env, const std::vector<QueryRecord>& queries,
                        const Qrels& qrels, const std::vector<int>& depths,
                        const ScorerFactory& make_scorer);

// CSV with header "k,mean_ndcg10,num_queries".
std::string sweep_to_csv(const SweepResult& r);

}  // namespace hare
