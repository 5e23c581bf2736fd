#pragma once

#include <map>
#include <string>
#include <vector>

#include "hare/types.hpp"

namespace hare {

// qid -> doc_id -> gain. Unjudged documents have gain 0 by convention.
struct Qrels {
    std::map<std::string, std::map<std::string, int>> gains;

    const std::map<std::string, int>* for_query(const std::string& qid) const {
        auto it = gains.find(qid);
        return it == gains.end() ? nullptr : &it->second;
    }
};

// TREC qrels lines: "qid 0 doc_id gain". Parse errors carry line numbers.
Qrels load_qrels(const std::string& path);

// nDCG@k with exponential gains:
//   DCG = sum_{i=1..min(k,|ranking|)} (2^gain_i - 1) / log2(i + 1)
// IDCG comes from ALL judged gains sorted descending; 0/0 evaluates to 0.
double ndcg_at_k(const std::vector<std::string>& ranking,
                 const std::map<std::string, int>& gains, int k = 10);

// TREC run lines: "qid Q0 doc_id rank score tag".
void write_run(const std::string& path,
               const std::map<std::string, std::vector<ScoredDoc>>& runs,
               const std::string& tag);
std::map<std::string, std::vector<ScoredDoc>> load_run(const std::string& path);

// Depth histogram of a final top-k against one retriever's initial-query
// ranking. Buckets: 1-10, 11-100, 101-1000, >1000, plus NOT-RETRIEVED for
// docs absent from the depth map.
struct DepthHistogram {
    std::vector<std::string> labels;  // "1-10", "11-100", "101-1000", ">1000", "NOT-RETRIEVED"
    std::vector<int> counts;
    std::vector<double> fractions;  // sums to 1 when any doc was counted
    int total = 0;
};

DepthHistogram depth_buckets(const std::vector<std::string>& final_ids,
                             const std::map<std::string, int>& depth_by_id);

// Session outcome classification from per-step nDCG@10 values
// (index 0 = before any refinement). "improved" records the first step at
// which the trace's maximum is reached.
struct OutcomeCounts {
    int solved_at_q0 = 0;
    std::map<int, int> improved_at_step;
    int unchanged = 0;
    int worse = 0;
    int total = 0;
};

OutcomeCounts outcome_analysis(const std::vector<std::vector<double>>& per_step_ndcg);

struct EvalReport {
    std::map<std::string, double> per_query_ndcg10;
    double mean_ndcg10 = 0.0;
    int num_queries = 0;
    int skipped_no_qrels = 0;
    double docs_scored_mean = 0.0;
    std::map<int, double> step_wall_ms_mean;
};

std::string report_to_json(const EvalReport& r);
std::string report_to_text(const EvalReport& r);

}  // namespace hare
