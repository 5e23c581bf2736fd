#include "hare/session.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include <json.hpp>

#include "hare/log.hpp"
#include "hare/query.hpp"

namespace hare {

std::string to_string(Termination t) {
    switch (t) {
        case Termination::MaxSteps: return "MAX_STEPS";
        case Termination::EmptyResults: return "EMPTY_RESULTS";
        case Termination::ExpanderStop: return "EXPANDER_STOP";
    }
    return "?";
}

Session::Session(const InvertedIndex& sparse, const DenseIndex* dense, const Embedder* embedder,
                 EnvKind wiring, Scorer& scorer, std::string query_id, std::string q0,
                 SessionConfig cfg)
    : sparse_(&sparse),
      dense_(dense),
      embedder_(embedder),
      wiring_(wiring),
      scorer_(&scorer),
      query_id_(std::move(query_id)),
      q0_(std::move(q0)),
      cfg_(cfg),
      score_cache_(std::make_shared<std::unordered_map<std::string, double>>()) {
    if (cfg_.k < 1 || cfg_.k_agg < 1 || cfg_.max_steps < 0 || cfg_.top_k < 1)
        throw std::invalid_argument("bad session config");
    if (wiring_ != EnvKind::Bm25 && (!dense_ || !embedder_))
        throw std::invalid_argument(to_string(wiring_) +
                                    " wiring needs a dense index and embedder");
}

std::string Session::query_text() const { return render_query(query_); }

void Session::annotate_depths(std::vector<ScoredDoc>& docs) const {
    for (auto& d : docs) {
        if (auto it = sparse_q0_depth_.find(d.id); it != sparse_q0_depth_.end()) {
            d.source = Source::Sparse;
            d.original_depth = it->second;
        } else if (auto jt = dense_q0_depth_.find(d.id); jt != dense_q0_depth_.end()) {
            d.source = Source::Dense;
            d.original_depth = jt->second;
        } else {
            d.original_depth = kUnknownDepth;
        }
    }
}

void Session::fold_into_aggregate(const std::vector<ScoredDoc>& pool) {
    // Union with first-occurrence metadata; every member is scored with
    // f(q0, .), through the shared cache when already known.
    std::vector<ScoredDoc> merged = hybrid_join(aggregate_, pool);

    std::vector<size_t> need;
    std::vector<const Document*> need_docs;
    for (size_t i = 0; i < merged.size(); ++i) {
        scored_docs_.insert(merged[i].id);
        auto it = score_cache_->find(merged[i].id);
        if (it != score_cache_->end()) {
            merged[i].score = it->second;
        } else {
            const Document* doc = sparse_->find_doc(merged[i].id);
            if (!doc) throw std::runtime_error("aggregate: doc not in corpus: " + merged[i].id);
            need.push_back(i);
            need_docs.push_back(doc);
        }
    }
    if (!need.empty()) {
        auto scores = scorer_->score_batch(q0_, need_docs);
        for (size_t j = 0; j < need.size(); ++j) {
            merged[need[j]].score = scores[j];
            (*score_cache_)[merged[need[j]].id] = scores[j];
        }
    }

    std::sort(merged.begin(), merged.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<int>(merged.size()) > cfg_.k_agg) merged.resize(cfg_.k_agg);
    aggregate_ = std::move(merged);
}

void Session::start() {
    if (started_) throw std::logic_error("session already started");
    started_ = true;
    query_ = parse_query(q0_);

    std::vector<ScoredDoc> d0;
    std::vector<ScoredDoc> dense_head;
    if (wiring_ != EnvKind::Bm25) {
        auto topk = dense_->search(embedder_->embed(q0_), cfg_.top_k);
        ++dense_calls_;
        for (const auto& d : topk) {
            topk_ids_.insert(d.id);
            dense_q0_depth_[d.id] = d.original_depth;
        }
        int head = std::min<int>(cfg_.k, static_cast<int>(topk.size()));
        dense_head.assign(topk.begin(), topk.begin() + head);
    }
    if (wiring_ != EnvKind::Dense) {
        auto sparse0 = sparse_->search(query_, cfg_.k);
        for (const auto& d : sparse0) sparse_q0_depth_[d.id] = d.original_depth;
        d0 = std::move(sparse0);
    }
    if (wiring_ == EnvKind::Dense) d0 = std::move(dense_head);
    else if (wiring_ == EnvKind::Hybrid) d0 = hybrid_join(d0, dense_head);

    last_retrieved_.clear();
    for (const auto& d : d0) last_retrieved_.push_back(d.id);
    if (d0.empty()) {
        terminated_ = Termination::EmptyResults;
        return;
    }
    fold_into_aggregate(d0);
}

std::vector<ScoredDoc> Session::retrieve_step(const StructuredQuery& q) {
    std::vector<ScoredDoc> full;
    std::vector<ScoredDoc> restricted;
    if (wiring_ != EnvKind::Dense) full = sparse_->search(q, cfg_.k);
    if (wiring_ != EnvKind::Bm25 && !topk_ids_.empty()) {
        StructuredQuery rq = q;
        rq.restrict_ids = topk_ids_;
        restricted = sparse_->search(rq, cfg_.k);
    }
    switch (wiring_) {
        case EnvKind::Bm25: return full;
        case EnvKind::Dense: return restricted;
        case EnvKind::Hybrid: return hybrid_join(full, restricted);
    }
    return {};
}

Session::StepOutcome Session::step(const Refinement& r) {
    if (!started_) throw std::logic_error("session not started");
    if (terminated_) throw std::logic_error("step on terminated session");
    if (t_ >= cfg_.max_steps) throw std::logic_error("session is out of steps");

    query_ = apply_refinement(query_, r);
    auto pool = retrieve_step(query_);
    annotate_depths(pool);
    ++t_;

    StepOutcome out;
    for (const auto& d : pool) out.retrieved_ids.push_back(d.id);
    last_retrieved_ = out.retrieved_ids;
    if (pool.empty()) {
        out.empty = true;
        terminated_ = Termination::EmptyResults;
        return out;
    }
    fold_into_aggregate(pool);
    return out;
}

std::vector<const Document*> Session::aggregate_docs(int n) const {
    std::vector<const Document*> out;
    for (const auto& d : aggregate_) {
        if (static_cast<int>(out.size()) >= n) break;
        out.push_back(sparse_->find_doc(d.id));
    }
    return out;
}

namespace {

std::optional<double> trace_ndcg(const Session& s, const Qrels* qrels) {
    if (!qrels) return std::nullopt;
    const auto* gains = qrels->for_query(s.query_id());
    if (!gains) return std::nullopt;
    std::vector<std::string> ids;
    for (const auto& d : s.aggregate()) ids.push_back(d.id);
    return ndcg_at_k(ids, *gains, 10);
}

double elapsed_ms(std::chrono::steady_clock::time_point from) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - from)
        .count();
}

}  // namespace

SessionResult run_session(Session& s, Expander& expander, const Qrels* qrels) {
    SessionResult result;
    auto t0 = std::chrono::steady_clock::now();
    s.start();
    TraceStep step0;
    step0.t = 0;
    step0.query = s.query_text();
    step0.retrieved_ids = s.last_retrieved();
    for (const auto& d : s.aggregate()) step0.aggregate_ids.push_back(d.id);
    step0.ndcg10 = trace_ndcg(s, qrels);
    step0.wall_ms = elapsed_ms(t0);
    result.trace.push_back(std::move(step0));

    while (!s.terminated() && s.t() < s.config().max_steps) {
        auto ts = std::chrono::steady_clock::now();
        auto proposal = expander.propose(s);
        if (!proposal) {
            result.termination = Termination::ExpanderStop;
            break;
        }
        auto outcome = s.step(*proposal);
        TraceStep step;
        step.t = s.t();
        step.query = s.query_text();
        step.refinement = render_refinement(*proposal);
        step.retrieved_ids = outcome.retrieved_ids;
        for (const auto& d : s.aggregate()) step.aggregate_ids.push_back(d.id);
        step.ndcg10 = trace_ndcg(s, qrels);
        step.wall_ms = elapsed_ms(ts);
        result.trace.push_back(std::move(step));
        if (s.terminated()) {
            result.termination = *s.terminated();
            break;
        }
    }
    if (!s.terminated() && s.t() >= s.config().max_steps)
        result.termination = Termination::MaxSteps;
    else if (s.terminated())
        result.termination = *s.terminated();

    result.final_aggregate = s.aggregate();
    result.docs_scored = static_cast<int>(s.scored_docs().size());
    result.dense_calls = s.dense_calls();
    return result;
}

std::string trace_to_jsonl(const std::string& query_id, const std::vector<TraceStep>& trace) {
    std::string out;
    for (const auto& step : trace) {
        nlohmann::json j;
        j["query_id"] = query_id;
        j["t"] = step.t;
        j["query"] = step.query;
        if (step.refinement) j["refinement"] = *step.refinement;
        else j["refinement"] = nullptr;
        j["retrieved_ids"] = step.retrieved_ids;
        j["aggregate_ids"] = step.aggregate_ids;
        if (step.ndcg10) j["ndcg10"] = *step.ndcg10;
        j["wall_ms"] = step.wall_ms;
        out += j.dump();
        out += "\n";
    }
    return out;
}

}  // namespace hare
