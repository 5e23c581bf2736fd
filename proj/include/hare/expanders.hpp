#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hare/evaluation.hpp"
#include "hare/model_client.hpp"
#include "hare/session.hpp"
#include "hare/types.hpp"

namespace hare {

struct Observation {
    std::string query;
    std::vector<std::string> docs;
};

// "query: {q} document: {d1} document: {d2} ..." with single spaces; each
// doc is first truncated to max_doc_tokens whitespace tokens.
std::string serialize_observation(const std::string& query,
                                  const std::vector<std::string>& docs,
                                  int max_doc_tokens = 96);
Observation parse_observation(const std::string& text);

// Observation of the session's current state (top obs_docs aggregate docs).
std::string make_observation(const Session& s);

// Behavior-cloning example emitted per accepted oracle step.
struct BcExample {
    std::string observation;
    std::string target;
    std::string query_id;
    int step = 0;
    double ndcg_before = 0.0;
    double ndcg_after = 0.0;
};

std::string bc_examples_to_jsonl(const std::vector<BcExample>& examples);

struct RocchioOptions {
    int per_op_budget = 20;  // candidates tried per operator (HT 20, HQ 100)
    std::vector<double> boost_grid{2.0, 4.0, 6.0, 8.0};
    bool enable_plus = true;
    bool enable_term = true;
    bool enable_boost = true;
    bool enable_minus = true;
};

// One greedy oracle move: candidate terms from the aggregate docs (PLUS /
// TERM / BOOST need the term in a gold doc too, MINUS the opposite), each
// operator's list ranked by idf descending, top per_op_budget tried by
// hypothetical step + nDCG@10. Returns the strictly best improvement;
// equal gains resolve by operator order PLUS < TERM < BOOST < MINUS, then
// idf, then term, then smaller boost factor. nullopt when nothing strictly
// improves. Throws std::runtime_error when qrels lack the session's query.
std::optional<Refinement> rocchio_step(const Session& s, const Qrels& qrels,
                                       const RocchioOptions& opt);

class RocchioExpander : public Expander {
public:
    RocchioExpander(const Qrels& qrels, RocchioOptions opt = {})
        : qrels_(&qrels), opt_(std::move(opt)) {}
    std::optional<Refinement> propose(Session& s) override {
        return rocchio_step(s, *qrels_, opt_);
    }

private:
    const Qrels* qrels_;
    RocchioOptions opt_;
};

struct RocchioSessionResult {
    SessionResult session;
    std::vector<BcExample> examples;
    double final_ndcg10 = 0.0;
    bool improved = false;
};

// Greedy oracle session: accept strictly improving steps until none is
// found or the step budget runs out, emitting one BcExample per accepted
// step (observation taken before the step).
RocchioSessionResult rocchio_session(Session& s, const Qrels& qrels,
                                     const RocchioOptions& opt = {});

struct Rm3Options {
    double lambda = 0.5;     // weight on p(w|q0)
    int max_candidates = 0;  // 0 = consider every aggregate-doc term
};

// Relevance-model expansion over the aggregate docs:
//   rm(w)    = sum_d p(w|d) * p(d),  p(w|d) = tf/len,
//   p(d)     = softmax over the aggregate of f(q0, d)
//   score(w) = lambda * p(w|q0) + (1 - lambda) * rm(w)
// Candidates rank by (score, rm, term); at lambda = 1 every non-query term
// scores 0 and the rm key takes over, which is the documented fallback.
// Returns PLUS on the best term not already in the query.
std::optional<Refinement> rm3_expand(const Session& s, const Rm3Options& opt = {});

class Rm3Expander : public Expander {
public:
    explicit Rm3Expander(Rm3Options opt = {}) : opt_(opt) {}
    std::optional<Refinement> propose(Session& s) override { return rm3_expand(s, opt_); }

private:
    Rm3Options opt_;
};

// Asks a remote model for the next refinement. Unparseable output, an
// empty refinement, or a term outside the aggregate vocabulary all read as
// the stop signal; transport failures surface as errors after retries.
class ExternalExpander : public Expander {
public:
    explicit ExternalExpander(ModelClient& client) : client_(&client) {}
    std::optional<Refinement> propose(Session& s) override;

private:
    ModelClient* client_;
};

}  // namespace hare
