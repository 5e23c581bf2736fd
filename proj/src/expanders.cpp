#include "hare/expanders.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>

#include <json.hpp>

#include "hare/query.hpp"
#include "hare/tokenize.hpp"

namespace hare {

std::string serialize_observation(const std::string& query,
                                  const std::vector<std::string>& docs, int max_doc_tokens) {
    std::string out = "query: " + query;
    for (const auto& d : docs)
        out += " document: " + truncate_whitespace_tokens(d, max_doc_tokens);
    return out;
}

Observation parse_observation(const std::string& text) {
    constexpr const char* kQuery = "query: ";
    constexpr const char* kDoc = " document: ";
    if (text.rfind(kQuery, 0) != 0)
        throw std::invalid_argument("observation must start with 'query: '");
    Observation obs;
    size_t pos = std::strlen(kQuery);
    size_t next = text.find(kDoc, pos);
    obs.query = text.substr(pos, next == std::string::npos ? next : next - pos);
    while (next != std::string::npos) {
        size_t start = next + std::strlen(kDoc);
        size_t end = text.find(kDoc, start);
        obs.docs.push_back(text.substr(start, end == std::string::npos ? end : end - start));
        next = end;
    }
    return obs;
}

std::string make_observation(const Session& s) {
    std::vector<std::string> docs;
    for (const Document* d : s.aggregate_docs(s.config().obs_docs)) {
        if (!d) continue;
        docs.push_back(d->title.empty() ? d->text : d->title + " " + d->text);
    }
    return serialize_observation(s.query_text(), docs, s.config().obs_doc_tokens);
}

std::string bc_examples_to_jsonl(const std::vector<BcExample>& examples) {
    std::string out;
    for (const auto& e : examples) {
        nlohmann::json j;
        j["observation"] = e.observation;
        j["target"] = e.target;
        j["query_id"] = e.query_id;
        j["step"] = e.step;
        j["ndcg_before"] = e.ndcg_before;
        j["ndcg_after"] = e.ndcg_after;
        out += j.dump();
        out += "\n";
    }
    return out;
}

namespace {

double aggregate_ndcg10(const Session& s, const std::map<std::string, int>& gains) {
    std::vector<std::string> ids;
    for (const auto& d : s.aggregate()) ids.push_back(d.id);
    return ndcg_at_k(ids, gains, 10);
}

// Terms of the current aggregate docs, split into those that also occur in
// some gold doc (positive candidates) and those occurring in none (MINUS
// candidates), each ranked by (idf desc, term asc).
struct CandidateSets {
    std::vector<std::string> positive;
    std::vector<std::string> negative;
};

CandidateSets rocchio_candidates(const Session& s, const std::set<std::string>& gold_ids) {
    const InvertedIndex& index = s.index();
    std::set<std::string> agg_vocab;
    for (const auto& d : s.aggregate()) {
        int ord = index.ord_of(d.id);
        if (ord < 0) continue;
        for (const auto& [term, _] : index.doc_terms(ord)) agg_vocab.insert(term);
    }
    std::set<std::string> gold_vocab;
    for (const auto& id : gold_ids) {
        int ord = index.ord_of(id);
        if (ord < 0) continue;
        for (const auto& [term, _] : index.doc_terms(ord)) gold_vocab.insert(term);
    }

    CandidateSets out;
    for (const auto& term : agg_vocab)
        (gold_vocab.count(term) ? out.positive : out.negative).push_back(term);
    auto by_idf = [&index](const std::string& a, const std::string& b) {
        double ia = index.idf(a), ib = index.idf(b);
        if (ia != ib) return ia > ib;
        return a < b;
    };
    std::sort(out.positive.begin(), out.positive.end(), by_idf);
    std::sort(out.negative.begin(), out.negative.end(), by_idf);
    return out;
}

}  // namespace

std::optional<Refinement> rocchio_step(const Session& s, const Qrels& qrels,
                                       const RocchioOptions& opt) {
    const auto* gains = qrels.for_query(s.query_id());
    if (!gains)
        throw std::runtime_error("no qrels for query " + s.query_id());
    std::set<std::string> gold_ids;
    for (const auto& [id, g] : *gains)
        if (g > 0) gold_ids.insert(id);

    double baseline = aggregate_ndcg10(s, *gains);
    auto cands = rocchio_candidates(s, gold_ids);

    double best_gain = 0.0;
    std::optional<Refinement> best;
    auto consider = [&](const Refinement& r) {
        Session trial = s;
        trial.step(r);
        double after = aggregate_ndcg10(trial, *gains);
        if (after - baseline > best_gain) {
            best_gain = after - baseline;
            best = r;
        }
    };

    auto top = [&](const std::vector<std::string>& ranked) {
        size_t n = std::min<size_t>(ranked.size(), static_cast<size_t>(opt.per_op_budget));
        return std::vector<std::string>(ranked.begin(), ranked.begin() + n);
    };

    // Trial order is the tie order: first strictly-best candidate wins.
    if (opt.enable_plus)
        for (const auto& term : top(cands.positive))
            consider({RefinementOp::Plus, term, 1.0});
    if (opt.enable_term)
        for (const auto& term : top(cands.positive))
            consider({RefinementOp::Term, term, 1.0});
    if (opt.enable_boost)
        for (const auto& term : top(cands.positive))
            for (double f : opt.boost_grid)
                consider({RefinementOp::Boost, term, f});
    if (opt.enable_minus)
        for (const auto& term : top(cands.negative))
            consider({RefinementOp::Minus, term, 1.0});
    return best;
}

RocchioSessionResult rocchio_session(Session& s, const Qrels& qrels,
                                     const RocchioOptions& opt) {
    const auto* gains = qrels.for_query(s.query_id());
    if (!gains) throw std::runtime_error("no qrels for query " + s.query_id());

    RocchioSessionResult result;
    auto clock_start = std::chrono::steady_clock::now();
    s.start();
    auto elapsed = [&clock_start] {
        auto now = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(now - clock_start).count();
        clock_start = now;
        return ms;
    };

    TraceStep step0;
    step0.t = 0;
    step0.query = s.query_text();
    step0.retrieved_ids = s.last_retrieved();
    for (const auto& d : s.aggregate()) step0.aggregate_ids.push_back(d.id);
    step0.ndcg10 = aggregate_ndcg10(s, *gains);
    step0.wall_ms = elapsed();
    result.session.trace.push_back(step0);

    while (!s.terminated() && s.t() < s.config().max_steps) {
        double before = aggregate_ndcg10(s, *gains);
        auto proposal = rocchio_step(s, qrels, opt);
        if (!proposal) {
            result.session.termination = Termination::ExpanderStop;
            break;
        }
        std::string obs = make_observation(s);
        auto outcome = s.step(*proposal);
        double after = aggregate_ndcg10(s, *gains);

        BcExample ex;
        ex.observation = std::move(obs);
        ex.target = render_refinement(*proposal);
        ex.query_id = s.query_id();
        ex.step = s.t();
        ex.ndcg_before = before;
        ex.ndcg_after = after;
        result.examples.push_back(std::move(ex));

        TraceStep step;
        step.t = s.t();
        step.query = s.query_text();
        step.refinement = render_refinement(*proposal);
        step.retrieved_ids = outcome.retrieved_ids;
        for (const auto& d : s.aggregate()) step.aggregate_ids.push_back(d.id);
        step.ndcg10 = after;
        step.wall_ms = elapsed();
        result.session.trace.push_back(std::move(step));
        if (s.terminated()) {
            result.session.termination = *s.terminated();
            break;
        }
    }
    if (!s.terminated() && s.t() >= s.config().max_steps)
        result.session.termination = Termination::MaxSteps;

    result.session.final_aggregate = s.aggregate();
    result.session.docs_scored = static_cast<int>(s.scored_docs().size());
    result.session.dense_calls = s.dense_calls();
    result.final_ndcg10 = aggregate_ndcg10(s, *gains);
    result.improved = !result.examples.empty();
    return result;
}

std::optional<Refinement> rm3_expand(const Session& s, const Rm3Options& opt) {
    const auto& agg = s.aggregate();
    if (agg.empty()) return std::nullopt;
    const InvertedIndex& index = s.index();

    // p(d): softmax over the aggregate of the cached f(q0, .) scores
    double max_f = agg[0].score;
    for (const auto& d : agg) max_f = std::max(max_f, d.score);
    double z = 0.0;
    std::vector<double> pd(agg.size());
    for (size_t i = 0; i < agg.size(); ++i) {
        pd[i] = std::exp(agg[i].score - max_f);
        z += pd[i];
    }
    for (double& p : pd) p /= z;

    std::map<std::string, double> rm;
    for (size_t i = 0; i < agg.size(); ++i) {
        int ord = index.ord_of(agg[i].id);
        if (ord < 0) continue;
        const Document& doc = index.doc(ord);
        if (doc.length == 0) continue;
        for (const auto& [term, tf] : index.doc_terms(ord))
            rm[term] += pd[i] * tf / doc.length;
    }
    if (rm.empty()) return std::nullopt;

    std::map<std::string, double> pq;
    {
        auto toks = tokenize(s.q0());
        for (const auto& t : toks) pq[t] += 1.0 / toks.size();
    }

    struct Cand {
        std::string term;
        double score;
        double rm;
    };
    std::vector<Cand> cands;
    cands.reserve(rm.size());
    for (const auto& [term, rm_w] : rm) {
        auto it = pq.find(term);
        double pqw = it == pq.end() ? 0.0 : it->second;
        cands.push_back({term, opt.lambda * pqw + (1.0 - opt.lambda) * rm_w, rm_w});
    }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.rm != b.rm) return a.rm > b.rm;
        return a.term < b.term;
    });
    size_t limit = opt.max_candidates > 0
                       ? std::min<size_t>(cands.size(), static_cast<size_t>(opt.max_candidates))
                       : cands.size();
    for (size_t i = 0; i < limit; ++i)
        if (!query_contains_term(s.query(), cands[i].term))
            return Refinement{RefinementOp::Plus, cands[i].term, 1.0};
    return std::nullopt;
}

std::optional<Refinement> ExternalExpander::propose(Session& s) {
    auto text = client_->expand(make_observation(s));
    if (!text) return std::nullopt;
    auto r = parse_refinement(*text);
    if (!r) return std::nullopt;
    // Grammar constraint: the term must come from the aggregate vocabulary.
    const InvertedIndex& index = s.index();
    bool in_vocab = false;
    for (const auto& d : s.aggregate()) {
        int ord = index.ord_of(d.id);
        if (ord >= 0 && index.doc_terms(ord).count(r->term)) {
            in_vocab = true;
            break;
        }
    }
    if (!in_vocab) return std::nullopt;
    return r;
}

}  // namespace hare
