#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "hare/query.hpp"
#include "hare/session.hpp"

using namespace hare;

namespace {

// Counts how many individual documents the scorer is asked about, so tests
// can pin down the score-once-per-session contract.
class CountingScorer : public Scorer {
public:
    explicit CountingScorer(Scorer& inner) : inner_(&inner) {}
    double score(const std::string& q, const Document& d) override {
        ++doc_scores;
        return inner_->score(q, d);
    }
    std::vector<double> score_batch(const std::string& q,
                                    const std::vector<const Document*>& docs) override {
        doc_scores += static_cast<int>(docs.size());
        return inner_->score_batch(q, docs);
    }
    int doc_scores = 0;

private:
    Scorer* inner_;
};

class ScriptedExpander : public Expander {
public:
    explicit ScriptedExpander(std::vector<Refinement> seq) : seq_(std::move(seq)) {}
    std::optional<Refinement> propose(Session&) override {
        if (next_ >= seq_.size()) return std::nullopt;
        return seq_[next_++];
    }

private:
    std::vector<Refinement> seq_;
    size_t next_ = 0;
};

struct SessionFixture {
    InvertedIndex index;
    Embedder embedder;
    DenseIndex dense;
    Qrels qrels;

    SessionFixture()
        : index(InvertedIndex::build({
              {"a1", "", "alpha one", 0},
              {"a2", "", "alpha two", 0},
              {"a3", "", "alpha three", 0},
              {"b1", "", "beta one", 0},
              {"b2", "", "beta two", 0},
              {"g", "", "alpha beta gold", 0},
          })),
          embedder(Embedder::feature_hash(32)),
          dense(DenseIndex::build(index.docs(), embedder)) {
        qrels.gains["q1"] = {{"a1", 3}, {"g", 2}, {"a2", 1}};
    }

    SessionConfig cfg(int k = 3, int max_steps = 5) const {
        SessionConfig c;
        c.k = k;
        c.k_agg = 10;
        c.max_steps = max_steps;
        c.top_k = 1000;
        return c;
    }
};

std::vector<std::string> agg_ids(const Session& s) {
    std::vector<std::string> out;
    for (const auto& d : s.aggregate()) out.push_back(d.id);
    return out;
}

}  // namespace

TEST_CASE("session constructor validates config and wiring") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    SessionConfig bad = fx.cfg();
    bad.k = 0;
    CHECK_THROWS_AS(Session(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha",
                            bad),
                    std::invalid_argument);
    CHECK_THROWS_AS(Session(fx.index, nullptr, nullptr, EnvKind::Dense, scorer, "q1", "alpha",
                            fx.cfg()),
                    std::invalid_argument);
    CHECK_THROWS_AS(Session(fx.index, nullptr, nullptr, EnvKind::Hybrid, scorer, "q1",
                            "alpha", fx.cfg()),
                    std::invalid_argument);
    // Sparse-only wiring needs no dense parts at all.
    Session ok(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    CHECK(ok.t() == 0);
}

TEST_CASE("step before start and double start are logic errors") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    CHECK_THROWS_AS(s.step({RefinementOp::Term, "beta", 1.0}), std::logic_error);
    s.start();
    CHECK_THROWS_AS(s.start(), std::logic_error);
}

TEST_CASE("sparse-only sessions never touch the dense retriever") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, &fx.dense, &fx.embedder, EnvKind::Bm25, scorer, "q1", "alpha",
              fx.cfg());
    s.start();
    CHECK(s.dense_calls() == 0);
    CHECK(s.topk_ids().empty());
    // BM25 top-3 for "alpha": the three short alpha docs, ids ascending.
    CHECK(s.last_retrieved() == std::vector<std::string>{"a1", "a2", "a3"});
    // Aggregate ranks by the oracle gains: a1 (3), a2 (1), then zero-gain a3.
    CHECK(agg_ids(s) == std::vector<std::string>{"a1", "a2", "a3"});
    s.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(s.dense_calls() == 0);
}

TEST_CASE("step zero makes the single dense call and freezes the sub-collection") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    SessionConfig cfg = fx.cfg();
    cfg.top_k = 2;  // tiny frozen set so the restriction is visible
    Session s(fx.index, &fx.dense, &fx.embedder, EnvKind::Dense, scorer, "q1", "alpha", cfg);
    s.start();
    CHECK(s.dense_calls() == 1);
    CHECK(s.topk_ids().size() == 2);
    // D0 is the head of the dense ranking.
    CHECK(s.last_retrieved().size() == 2);
    for (const auto& id : s.last_retrieved()) CHECK(s.topk_ids().count(id) == 1);

    // Every later step retrieves lexically inside the frozen ids only.
    s.step({RefinementOp::Term, "beta", 1.0});
    CHECK(s.dense_calls() == 1);
    for (const auto& id : s.last_retrieved()) CHECK(s.topk_ids().count(id) == 1);
    s.step({RefinementOp::Term, "alpha", 1.0});
    s.step({RefinementOp::Term, "one", 1.0});
    CHECK(s.dense_calls() == 1);
}

TEST_CASE("hybrid sessions join the full and restricted sparse pools") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    SessionConfig cfg = fx.cfg();
    cfg.top_k = 2;
    Session s(fx.index, &fx.dense, &fx.embedder, EnvKind::Hybrid, scorer, "q1", "alpha", cfg);
    s.start();
    CHECK(s.dense_calls() == 1);
    // D0 = join(sparse top-k, dense head): starts with the sparse side.
    auto d0 = s.last_retrieved();
    REQUIRE(d0.size() >= 3);
    CHECK(std::vector<std::string>(d0.begin(), d0.begin() + 3) ==
          std::vector<std::string>{"a1", "a2", "a3"});

    // A full-corpus match outside the frozen ids can still arrive.
    s.step({RefinementOp::Plus, "beta", 1.0});
    bool outside = false;
    for (const auto& id : s.last_retrieved())
        if (!s.topk_ids().count(id)) outside = true;
    CHECK(outside);
    CHECK(s.dense_calls() == 1);
}

TEST_CASE("the aggregate keeps the best k_agg docs ranked by the frozen scorer") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    s.start();
    s.step({RefinementOp::Plus, "beta", 1.0});
    // Union so far: {a1,a2,a3} + {b1,b2,g}; oracle gains 3,1,0,0,0,2.
    CHECK(agg_ids(s) == std::vector<std::string>{"a1", "g", "a2", "a3", "b1", "b2"});
    CHECK(s.scored_docs().size() == 6);

    SessionConfig small = fx.cfg();
    small.k_agg = 2;
    Session s2(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", small);
    s2.start();
    s2.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(agg_ids(s2) == std::vector<std::string>{"a1", "g"});
    // The aggregate truncates, but everything seen was scored.
    CHECK(s2.scored_docs().size() == 6);
}

TEST_CASE("each document is scored once per session") {
    SessionFixture fx;
    OracleScorer oracle(fx.qrels, "q1");
    CountingScorer counting(oracle);
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, counting, "q1", "alpha", fx.cfg());
    s.start();
    CHECK(counting.doc_scores == 3);
    s.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(counting.doc_scores == 6);
    // The same pool again: every doc is already cached.
    s.step({RefinementOp::Term, "beta", 1.0});
    CHECK(counting.doc_scores == 6);
}

TEST_CASE("session copies share the score cache for cheap hypothetical steps") {
    SessionFixture fx;
    OracleScorer oracle(fx.qrels, "q1");
    CountingScorer counting(oracle);
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, counting, "q1", "alpha", fx.cfg());
    s.start();
    auto before = agg_ids(s);

    Session trial = s;
    trial.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(counting.doc_scores == 6);
    CHECK(agg_ids(s) == before);   // the original is untouched
    CHECK(s.scored_docs().size() == 3);

    // Replaying the step on the original hits the shared cache.
    s.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(counting.doc_scores == 6);
    CHECK(agg_ids(s) == agg_ids(trial));
}

TEST_CASE("an empty pool terminates the session and leaves the aggregate") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    s.start();
    auto before = agg_ids(s);
    auto out = s.step({RefinementOp::Plus, "nonexistent", 1.0});
    CHECK(out.empty);
    CHECK(out.retrieved_ids.empty());
    REQUIRE(s.terminated().has_value());
    CHECK(*s.terminated() == Termination::EmptyResults);
    CHECK(agg_ids(s) == before);
    CHECK_THROWS_AS(s.step({RefinementOp::Term, "beta", 1.0}), std::logic_error);
}

TEST_CASE("a query matching nothing terminates at step zero") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "zzz", fx.cfg());
    s.start();
    REQUIRE(s.terminated().has_value());
    CHECK(*s.terminated() == Termination::EmptyResults);
    CHECK(s.aggregate().empty());
}

TEST_CASE("the step budget is enforced") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha",
              fx.cfg(3, /*max_steps=*/1));
    s.start();
    s.step({RefinementOp::Term, "beta", 1.0});
    CHECK(s.t() == 1);
    CHECK_THROWS_AS(s.step({RefinementOp::Term, "one", 1.0}), std::logic_error);
}

TEST_CASE("the query evolves by appended refinements") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    s.start();
    CHECK(s.query_text() == "alpha");
    s.step({RefinementOp::Plus, "beta", 1.0});
    CHECK(s.query_text() == "alpha +beta");
    s.step({RefinementOp::Boost, "one", 4.0});
    CHECK(s.query_text() == "alpha +beta one^4");
    CHECK(s.q0() == "alpha");  // the scorer keys on the initial query forever
}

TEST_CASE("aggregate_docs returns at most n corpus documents") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    s.start();
    auto docs = s.aggregate_docs(2);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0]->id == "a1");
    CHECK(s.aggregate_docs(100).size() == s.aggregate().size());
}

TEST_CASE("run_session stops when the expander has nothing to propose") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    NullExpander expander;
    auto result = run_session(s, expander, &fx.qrels);
    CHECK(result.termination == Termination::ExpanderStop);
    REQUIRE(result.trace.size() == 1);
    CHECK(result.trace[0].t == 0);
    CHECK(result.trace[0].query == "alpha");
    CHECK(!result.trace[0].refinement.has_value());
    REQUIRE(result.trace[0].ndcg10.has_value());
    CHECK(result.docs_scored == 3);
    CHECK(result.dense_calls == 0);
}

TEST_CASE("run_session records every accepted step in the trace") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    ScriptedExpander expander({{RefinementOp::Plus, "beta", 1.0},
                               {RefinementOp::Term, "gold", 1.0}});
    auto result = run_session(s, expander, &fx.qrels);
    CHECK(result.termination == Termination::ExpanderStop);
    REQUIRE(result.trace.size() == 3);
    CHECK(result.trace[1].t == 1);
    CHECK(*result.trace[1].refinement == "+beta");
    CHECK(result.trace[1].query == "alpha +beta");
    CHECK(*result.trace[2].refinement == "gold");
    // Folding the judged doc "g" into the aggregate lifts nDCG.
    REQUIRE(result.trace[0].ndcg10.has_value());
    REQUIRE(result.trace[1].ndcg10.has_value());
    CHECK(*result.trace[1].ndcg10 > *result.trace[0].ndcg10);
    for (const auto& step : result.trace) CHECK(step.wall_ms >= 0.0);
    CHECK(result.final_aggregate.size() == s.aggregate().size());
}

TEST_CASE("run_session reports the step-budget termination") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha",
              fx.cfg(3, /*max_steps=*/2));
    ScriptedExpander expander({{RefinementOp::Term, "beta", 1.0},
                               {RefinementOp::Term, "one", 1.0},
                               {RefinementOp::Term, "two", 1.0}});
    auto result = run_session(s, expander, &fx.qrels);
    CHECK(result.termination == Termination::MaxSteps);
    CHECK(result.trace.size() == 3);  // step 0 plus the two budgeted steps
}

TEST_CASE("run_session reports empty-result termination") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    ScriptedExpander expander({{RefinementOp::Plus, "nonexistent", 1.0}});
    auto result = run_session(s, expander, &fx.qrels);
    CHECK(result.termination == Termination::EmptyResults);
    REQUIRE(result.trace.size() == 2);
    CHECK(result.trace[1].retrieved_ids.empty());
}

TEST_CASE("run_session without qrels leaves the trace metrics empty") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    NullExpander expander;
    auto result = run_session(s, expander, nullptr);
    CHECK(!result.trace[0].ndcg10.has_value());
}

TEST_CASE("termination names are stable") {
    CHECK(to_string(Termination::MaxSteps) == "MAX_STEPS");
    CHECK(to_string(Termination::EmptyResults) == "EMPTY_RESULTS");
    CHECK(to_string(Termination::ExpanderStop) == "EXPANDER_STOP");
}

TEST_CASE("trace_to_jsonl emits one well-formed object per step") {
    SessionFixture fx;
    OracleScorer scorer(fx.qrels, "q1");
    Session s(fx.index, nullptr, nullptr, EnvKind::Bm25, scorer, "q1", "alpha", fx.cfg());
    ScriptedExpander expander({{RefinementOp::Plus, "beta", 1.0}});
    auto result = run_session(s, expander, &fx.qrels);
    auto jsonl = trace_to_jsonl("q1", result.trace);

    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos < jsonl.size()) {
        size_t nl = jsonl.find('\n', pos);
        lines.push_back(jsonl.substr(pos, nl - pos));
        pos = nl + 1;
    }
    REQUIRE(lines.size() == result.trace.size());
    for (size_t i = 0; i < lines.size(); ++i) {
        auto j = nlohmann::json::parse(lines[i]);
        CHECK(j["query_id"] == "q1");
        CHECK(j["t"] == static_cast<int>(i));
        CHECK(j.contains("query"));
        CHECK(j.contains("refinement"));
        CHECK(j.contains("retrieved_ids"));
        CHECK(j.contains("aggregate_ids"));
        CHECK(j.contains("wall_ms"));
        CHECK(j.contains("ndcg10"));
    }
    auto j0 = nlohmann::json::parse(lines[0]);
    CHECK(j0["refinement"].is_null());
    auto j1 = nlohmann::json::parse(lines[1]);
    CHECK(j1["refinement"] == "+beta");
}
