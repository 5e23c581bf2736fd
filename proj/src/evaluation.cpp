#include "hare/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hare {

Qrels load_qrels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open qrels file: " + path);
    Qrels q;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, iter, docid;
        int gain;
        if (!(ss >> qid >> iter >> docid >> gain))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'qid 0 doc_id gain'");
        q.gains[qid][docid] = gain;
    }
    return q;
}

double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::map<std::string, int>& gains, int k) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    auto discount = [](int rank1) { return std::log2(static_cast<double>(rank1) + 1.0); };

    double dcg = 0.0;
    int depth = std::min<int>(k, static_cast<int>(ranking.size()));
    for (int i = 0; i < depth; ++i) {
        auto it = gains.find(ranking[i]);
        int g = it == gains.end() ? 0 : it->second;
        if (g != 0) dcg += (std::exp2(static_cast<double>(g)) - 1.0) / discount(i + 1);
    }

    std::vector<int> ideal;
    ideal.reserve(gains.size());
    for (const auto& [_, g] : gains)
        if (g > 0) ideal.push_back(g);
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (int i = 0; i < std::min<int>(k, static_cast<int>(ideal.size())); ++i)
        idcg += (std::exp2(static_cast<double>(ideal[i])) - 1.0) / discount(i + 1);

    return idcg == 0.0 ? 0.0 : dcg / idcg;
}

void write_run(const std::string& path,
               const std::map<std::string, std::vector<ScoredDoc>>& runs,
               const std::string& tag) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write run file: " + path);
    char buf[64];
    for (const auto& [qid, docs] : runs) {
        for (size_t i = 0; i < docs.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.6f", docs[i].score);
            out << qid << " Q0 " << docs[i].id << " " << (i + 1) << " " << buf << " " << tag
                << "\n";
        }
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::map<std::string, std::vector<ScoredDoc>> load_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open run file: " + path);
    std::map<std::string, std::vector<ScoredDoc>> runs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, q0, docid, tag;
        int rank;
        double score;
        if (!(ss >> qid >> q0 >> docid >> rank >> score >> tag))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'qid Q0 doc_id rank score tag'");
        runs[qid].push_back({docid, score, Source::Sparse, rank});
    }
    // Within a query, trust rank over file order.
    for (auto& [_, docs] : runs)
        std::sort(docs.begin(), docs.end(), [](const ScoredDoc& a, const ScoredDoc& b) {
            return a.original_depth < b.original_depth;
        });
    return runs;
}

DepthHistogram depth_buckets(const std::vector<std::string>& final_ids,
                             const std::map<std::string, int>& depth_by_id) {
    DepthHistogram h;
    h.labels = {"1-10", "11-100", "101-1000", ">1000", "NOT-RETRIEVED"};
    h.counts.assign(h.labels.size(), 0);
    for (const auto& id : final_ids) {
        auto it = depth_by_id.find(id);
        size_t bucket;
        if (it == depth_by_id.end() || it->second == kUnknownDepth) bucket = 4;
        else if (it->second <= 10) bucket = 0;
        else if (it->second <= 100) bucket = 1;
        else if (it->second <= 1000) bucket = 2;
        else bucket = 3;
        ++h.counts[bucket];
        ++h.total;
    }
    h.fractions.assign(h.labels.size(), 0.0);
    if (h.total > 0)
        for (size_t i = 0; i < h.counts.size(); ++i)
            h.fractions[i] = static_cast<double>(h.counts[i]) / h.total;
    return h;
}

OutcomeCounts outcome_analysis(const std::vector<std::vector<double>>& per_step_ndcg) {
    OutcomeCounts out;
    for (const auto& trace : per_step_ndcg) {
        if (trace.empty()) continue;
        ++out.total;
        double initial = trace.front();
        double final_v = trace.back();
        if (initial == 1.0) {
            ++out.solved_at_q0;
        } else if (final_v > initial) {
            double best = *std::max_element(trace.begin(), trace.end());
            int step = 0;
            for (size_t t = 0; t < trace.size(); ++t)
                if (trace[t] == best) { step = static_cast<int>(t); break; }
            ++out.improved_at_step[step];
        } else if (final_v < initial) {
            ++out.worse;
        } else {
            ++out.unchanged;
        }
    }
    return out;
}

std::string report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["mean_ndcg10"] = r.mean_ndcg10;
    j["num_queries"] = r.num_queries;
    j["skipped_no_qrels"] = r.skipped_no_qrels;
    j["docs_scored_mean"] = r.docs_scored_mean;
    j["per_query_ndcg10"] = r.per_query_ndcg10;
    nlohmann::json wall = nlohmann::json::object();
    for (const auto& [step, ms] : r.step_wall_ms_mean) wall[std::to_string(step)] = ms;
    j["wall_ms"] = wall;
    return j.dump(2);
}

std::string report_to_text(const EvalReport& r) {
    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", r.mean_ndcg10);
    out << "queries evaluated: " << r.num_queries << "\n";
    if (r.skipped_no_qrels > 0) out << "skipped (no qrels): " << r.skipped_no_qrels << "\n";
    out << "mean nDCG@10:      " << buf << "\n";
    if (r.docs_scored_mean > 0) {
        std::snprintf(buf, sizeof(buf), "%.1f", r.docs_scored_mean);
        out << "docs scored/query: " << buf << "\n";
    }
    return out.str();
}

}  // namespace hare
