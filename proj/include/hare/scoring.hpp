#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hare/evaluation.hpp"
#include "hare/index.hpp"
#include "hare/model_client.hpp"
#include "hare/types.hpp"

namespace hare {

// Pointwise relevance scorer f(q, d). Implementations are pure given their
// backing state, so per-session caching of (q0, doc) scores is sound.
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(const std::string& query, const Document& doc) = 0;
    // Batched variant for transports that benefit; default loops.
    virtual std::vector<double> score_batch(const std::string& query,
                                            const std::vector<const Document*>& docs);
};

// BM25 value of the query tokens against the single document, using corpus
// statistics (idf, average length) from the index. Document text is capped
// at max_doc_tokens whitespace tokens, mirroring what a remote model sees.
class LexicalScorer : public Scorer {
public:
    explicit LexicalScorer(const InvertedIndex& index, int max_doc_tokens = 256)
        : index_(&index), max_doc_tokens_(max_doc_tokens) {}
    double score(const std::string& query, const Document& doc) override;

private:
    const InvertedIndex* index_;
    int max_doc_tokens_;
};

// Relevance gain from qrels for one fixed query id; unjudged docs score 0.
class OracleScorer : public Scorer {
public:
    OracleScorer(const Qrels& qrels, std::string query_id)
        : qrels_(&qrels), query_id_(std::move(query_id)) {}
    double score(const std::string& query, const Document& doc) override;

private:
    const Qrels* qrels_;
    std::string query_id_;
};

// Remote model over the NDJSON protocol; inputs use the
// "query: {query} document: {document}" serialization.
class ExternalScorer : public Scorer {
public:
    explicit ExternalScorer(ModelClient& client, int max_doc_tokens = 256)
        : client_(&client), max_doc_tokens_(max_doc_tokens) {}
    double score(const std::string& query, const Document& doc) override;
    std::vector<double> score_batch(const std::string& query,
                                    const std::vector<const Document*>& docs) override;

private:
    ModelClient* client_;
    int max_doc_tokens_;
};

// Listwise softmax cross-entropy over one candidate list:
//   loss = -sum_i y_i * log(exp(s_i) / sum_j exp(s_j))
// computed with a max-shift. labels must hold exactly one 1 and m >= 2
// entries; size mismatches and degenerate lists throw std::invalid_argument.
double listwise_softmax_ce(const std::vector<int>& labels, const std::vector<double>& scores);

// One training list: BM25 top-k candidates for a query with exactly one
// gold (label 1) plus sampled non-gold negatives, order shuffled.
struct RerankList {
    std::string query_id;
    std::string query;
    std::vector<std::string> doc_ids;
    std::vector<int> labels;
    bool short_of_negatives = false;  // fewer than m-1 negatives available
};

struct RerankListStats {
    int total_queries = 0;
    int emitted = 0;
    int skipped_no_gold_in_topk = 0;
    int short_of_negatives = 0;
};

// Deterministic for a fixed seed. The gold is the best-ranked gold in the
// query's BM25 top-k; negatives are drawn uniformly without replacement
// from the remaining non-gold candidates in that top-k.
std::vector<RerankList> build_rerank_lists(const InvertedIndex& index,
                                           const std::vector<QueryRecord>& queries,
                                           const Qrels& qrels, int k, int m, uint64_t seed,
                                           RerankListStats* stats = nullptr);

// mt19937_64 with rejection-sampled bounded draws; bit-identical across
// platforms, unlike std::uniform_int_distribution.
class DetRng {
public:
    explicit DetRng(uint64_t seed) : gen_(seed) {}
    uint64_t next() { return gen_(); }
    uint64_t bounded(uint64_t n);
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(i)]);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace hare
