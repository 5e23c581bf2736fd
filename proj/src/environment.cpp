#include "hare/environment.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hare/query.hpp"

namespace hare {

EnvKind env_kind_from_string(const std::string& s) {
    if (s == "bm25") return EnvKind::Bm25;
    if (s == "dense") return EnvKind::Dense;
    if (s == "hybrid") return EnvKind::Hybrid;
    throw std::invalid_argument("unknown environment kind: " + s);
}

std::string to_string(EnvKind k) {
    switch (k) {
        case EnvKind::Bm25: return "bm25";
        case EnvKind::Dense: return "dense";
        case EnvKind::Hybrid: return "hybrid";
    }
    return "?";
}

std::vector<ScoredDoc> hybrid_join(const std::vector<ScoredDoc>& a,
                                   const std::vector<ScoredDoc>& b) {
    std::vector<ScoredDoc> out;
    out.reserve(a.size() + b.size());
    std::set<std::string> seen;
    for (const auto& d : a)
        if (seen.insert(d.id).second) out.push_back(d);
    for (const auto& d : b)
        if (seen.insert(d.id).second) out.push_back(d);
    return out;
}

std::vector<ScoredDoc> retrieve(const Environment& env, const StructuredQuery& q, int k) {
    if (!env.sparse) throw std::invalid_argument("environment has no sparse index");
    switch (env.kind) {
        case EnvKind::Bm25:
            return env.sparse->search(q, k);
        case EnvKind::Dense: {
            if (!env.dense || !env.embedder)
                throw std::invalid_argument("dense environment needs a dense index and embedder");
            return env.dense->search(env.embedder->embed(render_query(q)), k);
        }
        case EnvKind::Hybrid: {
            if (!env.dense || !env.embedder)
                throw std::invalid_argument("hybrid environment needs a dense index and embedder");
            auto sparse = env.sparse->search(q, k);
            auto dense = env.dense->search(env.embedder->embed(render_query(q)), k);
            return hybrid_join(sparse, dense);
        }
    }
    return {};
}

std::vector<ScoredDoc> rerank(Scorer& scorer, const std::string& query_text,
                              std::vector<ScoredDoc> candidates, const InvertedIndex& corpus) {
    std::vector<const Document*> docs;
    docs.reserve(candidates.size());
    for (const auto& c : candidates) {
        const Document* d = corpus.find_doc(c.id);
        if (!d) throw std::runtime_error("rerank: doc not in corpus: " + c.id);
        docs.push_back(d);
    }
    std::vector<double> scores;
    try {
        scores = scorer.score_batch(query_text, docs);
    } catch (const std::exception& e) {
        throw std::runtime_error("scorer failed on candidate batch (" +
                                 std::string(docs.empty() ? "?" : docs[0]->id) +
                                 "...): " + e.what());
    }
    for (size_t i = 0; i < candidates.size(); ++i) candidates[i].score = scores[i];
    std::sort(candidates.begin(), candidates.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    return candidates;
}

SweepResult depth_sweep(const Environment& env, const std::vector<QueryRecord>& queries,
                        const Qrels& qrels, const std::vector<int>& depths,
                        const ScorerFactory& make_scorer) {
    SweepResult result;
    std::set<std::string> counted_skips;
    for (int k : depths) {
        SweepRow row;
        row.k = k;
        double sum = 0.0;
        for (const auto& q : queries) {
            const auto* gains = qrels.for_query(q.id);
            if (!gains) {
                if (counted_skips.insert(q.id).second) ++result.skipped_no_qrels;
                continue;
            }
            auto pool = retrieve(env, parse_query(q.text), k);
            auto scorer = make_scorer(q.id);
            auto ranked = rerank(*scorer, q.text, std::move(pool), *env.sparse);
            std::vector<std::string> ids;
            ids.reserve(ranked.size());
            for (const auto& d : ranked) ids.push_back(d.id);
            sum += ndcg_at_k(ids, *gains, 10);
            ++row.num_queries;
        }
        row.mean_ndcg10 = row.num_queries ? sum / row.num_queries : 0.0;
        result.rows.push_back(row);
    }
    return result;
}

std::string sweep_to_csv(const SweepResult& r) {
    std::ostringstream out;
    out << "k,mean_ndcg10,num_queries\n";
    char buf[64];
    for (const auto& row : r.rows) {
        std::snprintf(buf, sizeof(buf), "%.6f", row.mean_ndcg10);
        out << row.k << "," << buf << "," << row.num_queries << "\n";
    }
    return out.str();
}

}  // namespace hare
