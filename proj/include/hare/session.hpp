#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "hare/dense.hpp"
#include "hare/environment.hpp"
#include "hare/index.hpp"
#include "hare/scoring.hpp"
#include "hare/types.hpp"

namespace hare {

struct SessionConfig {
    int k = 10;        // retrieval depth per step
    int k_agg = 10;    // aggregate size
    int max_steps = 5;
    int top_k = 1000;  // frozen dense sub-collection size
    int obs_docs = 10;
    int obs_doc_tokens = 96;
};

enum class Termination { MaxSteps, EmptyResults, ExpanderStop };
std::string to_string(Termination t);

struct TraceStep {
    int t = 0;
    std::string query;
    std::optional<std::string> refinement;  // absent for step 0
    std::vector<std::string> retrieved_ids;
    std::vector<std::string> aggregate_ids;
    std::optional<double> ndcg10;
    double wall_ms = 0.0;
};

// One interactive retrieval session over a fixed scorer f(q0, .).
//
// Step 0 retrieves the initial pools; for the Dense and Hybrid wirings this
// is the single dense call of the whole session, and its top_k ids freeze
// the restricted sub-collection. Every later step is sparse-only:
//   Bm25:   D = full-corpus BM25 for the refined query
//   Dense:  D = BM25 restricted to the frozen ids
//   Hybrid: D = hybrid_join(full BM25, restricted BM25)
// The aggregate keeps the k_agg best docs ever seen, ranked by f(q0, .);
// each doc is scored once per session (copies share the score cache, so
// hypothetical branches stay cheap).
class Session {
public:
    Session(const InvertedIndex& sparse, const DenseIndex* dense, const Embedder* embedder,
            EnvKind wiring, Scorer& scorer, std::string query_id, std::string q0,
            SessionConfig cfg = {});

    // Performs step 0. Call exactly once before step().
    void start();

    struct StepOutcome {
        std::vector<std::string> retrieved_ids;
        bool empty = false;
    };

    // Applies the refinement, retrieves, and folds results into the
    // aggregate. An empty pool terminates the session (aggregate unchanged).
    // Throws std::logic_error when already terminated or out of steps.
    StepOutcome step(const Refinement& r);

    int t() const { return t_; }
    const StructuredQuery& query() const { return query_; }
    std::string query_text() const;
    const std::string& q0() const { return q0_; }
    const std::string& query_id() const { return query_id_; }
    const std::vector<ScoredDoc>& aggregate() const { return aggregate_; }
    std::vector<const Document*> aggregate_docs(int n) const;
    const std::set<std::string>& topk_ids() const { return topk_ids_; }
    const std::set<std::string>& scored_docs() const { return scored_docs_; }
    int dense_calls() const { return dense_calls_; }
    std::optional<Termination> terminated() const { return terminated_; }
    const SessionConfig& config() const { return cfg_; }
    const InvertedIndex& index() const { return *sparse_; }
    const std::vector<std::string>& last_retrieved() const { return last_retrieved_; }
    const std::map<std::string, int>& sparse_q0_depth() const { return sparse_q0_depth_; }
    const std::map<std::string, int>& dense_q0_depth() const { return dense_q0_depth_; }

private:
    const InvertedIndex* sparse_;
    const DenseIndex* dense_;
    const Embedder* embedder_;
    EnvKind wiring_;
    Scorer* scorer_;
    std::string query_id_;
    std::string q0_;
    SessionConfig cfg_;

    StructuredQuery query_;
    int t_ = 0;
    bool started_ = false;
    std::optional<Termination> terminated_;
    std::vector<ScoredDoc> aggregate_;
    std::set<std::string> topk_ids_;
    std::set<std::string> scored_docs_;
    std::vector<std::string> last_retrieved_;
    std::map<std::string, int> sparse_q0_depth_;
    std::map<std::string, int> dense_q0_depth_;
    int dense_calls_ = 0;
    std::shared_ptr<std::unordered_map<std::string, double>> score_cache_;

    void annotate_depths(std::vector<ScoredDoc>& docs) const;
    void fold_into_aggregate(const std::vector<ScoredDoc>& pool);
    std::vector<ScoredDoc> retrieve_step(const StructuredQuery& q);
};

class Expander {
public:
    virtual ~Expander() = default;
    // nullopt means the expander has nothing further to propose.
    virtual std::optional<Refinement> propose(Session& s) = 0;
};

class NullExpander : public Expander {
public:
    std::optional<Refinement> propose(Session&) override { return std::nullopt; }
};

struct SessionResult {
    std::vector<ScoredDoc> final_aggregate;
    std::vector<TraceStep> trace;
    Termination termination = Termination::MaxSteps;
    int docs_scored = 0;
    int dense_calls = 0;
};

// Orchestrates start + expander loop + trace assembly. When qrels are given
// and cover the query, per-step nDCG@10 lands in the trace.
SessionResult run_session(Session& s, Expander& expander, const Qrels* qrels = nullptr);

// One JSONL line per trace step, query_id included for multi-query files.
std::string trace_to_jsonl(const std::string& query_id, const std::vector<TraceStep>& trace);

}  // namespace hare
