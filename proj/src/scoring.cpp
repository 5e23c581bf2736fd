#include "hare/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hare/query.hpp"
#include "hare/tokenize.hpp"

namespace hare {

std::vector<double> Scorer::score_batch(const std::string& query,
                                        const std::vector<const Document*>& docs) {
    std::vector<double> out;
    out.reserve(docs.size());
    for (const Document* d : docs) out.push_back(score(query, *d));
    return out;
}

double LexicalScorer::score(const std::string& query, const Document& doc) {
    std::string field = doc.title.empty() ? doc.text : doc.title + " " + doc.text;
    auto toks = tokenize(truncate_whitespace_tokens(field, max_doc_tokens_));
    std::map<std::string, int> counts;
    for (const auto& t : toks) ++counts[t];
    double len = static_cast<double>(toks.size());

    const auto& p = index_->params();
    double norm = p.k1 * (1.0 - p.b + p.b * len / index_->avg_doc_length());
    double s = 0.0;
    for (const auto& t : tokenize(query)) {
        auto it = counts.find(t);
        if (it == counts.end()) continue;
        s += index_->idf(t) * it->second / (it->second + norm);
    }
    return s;
}

double OracleScorer::score(const std::string&, const Document& doc) {
    const auto* gains = qrels_->for_query(query_id_);
    if (!gains) return 0.0;
    auto it = gains->find(doc.id);
    return it == gains->end() ? 0.0 : static_cast<double>(it->second);
}

double ExternalScorer::score(const std::string& query, const Document& doc) {
    return score_batch(query, {&doc})[0];
}

std::vector<double> ExternalScorer::score_batch(const std::string& query,
                                                const std::vector<const Document*>& docs) {
    std::vector<std::string> inputs;
    inputs.reserve(docs.size());
    for (const Document* d : docs) {
        std::string field = d->title.empty() ? d->text : d->title + " " + d->text;
        inputs.push_back(serialize_score_input(query, field, max_doc_tokens_));
    }
    return client_->score(inputs);
}

double listwise_softmax_ce(const std::vector<int>& labels, const std::vector<double>& scores) {
    if (labels.size() != scores.size())
        throw std::invalid_argument("labels and scores differ in length");
    if (labels.size() < 2) throw std::invalid_argument("list needs at least 2 entries");
    int positives = 0;
    int pos_idx = -1;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) {
            ++positives;
            pos_idx = static_cast<int>(i);
        } else if (labels[i] != 0) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
    if (positives != 1) throw std::invalid_argument("exactly one positive label required");

    double max_s = *std::max_element(scores.begin(), scores.end());
    double sum_exp = 0.0;
    for (double s : scores) sum_exp += std::exp(s - max_s);
    // -log softmax at the positive index
    return -(scores[pos_idx] - max_s - std::log(sum_exp));
}

uint64_t DetRng::bounded(uint64_t n) {
    if (n == 0) throw std::invalid_argument("bounded(0)");
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

std::vector<RerankList> build_rerank_lists(const InvertedIndex& index,
                                           const std::vector<QueryRecord>& queries,
                                           const Qrels& qrels, int k, int m, uint64_t seed,
                                           RerankListStats* stats) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (m < 2) throw std::invalid_argument("m must be >= 2");
    RerankListStats local;
    DetRng rng(seed);
    std::vector<RerankList> lists;

    for (const auto& q : queries) {
        ++local.total_queries;
        const auto* gains = qrels.for_query(q.id);
        auto top = index.search(parse_query(q.text), k);

        int gold_pos = -1;
        for (size_t i = 0; i < top.size() && gold_pos < 0; ++i) {
            if (!gains) break;
            auto it = gains->find(top[i].id);
            if (it != gains->end() && it->second > 0) gold_pos = static_cast<int>(i);
        }
        if (gold_pos < 0) {
            ++local.skipped_no_gold_in_topk;
            continue;
        }

        std::vector<std::string> negatives;
        for (const auto& d : top) {
            auto it = gains->find(d.id);
            bool is_gold = it != gains->end() && it->second > 0;
            if (!is_gold) negatives.push_back(d.id);
        }
        // uniform sample without replacement: partial Fisher-Yates prefix
        int want = m - 1;
        for (int i = 0; i < std::min<int>(want, static_cast<int>(negatives.size())); ++i) {
            size_t j = i + rng.bounded(negatives.size() - i);
            std::swap(negatives[i], negatives[j]);
        }
        if (static_cast<int>(negatives.size()) > want) negatives.resize(want);

        RerankList list;
        list.query_id = q.id;
        list.query = q.text;
        list.short_of_negatives = static_cast<int>(negatives.size()) < want;
        if (list.short_of_negatives) ++local.short_of_negatives;

        list.doc_ids.push_back(top[gold_pos].id);
        list.labels.push_back(1);
        for (auto& n : negatives) {
            list.doc_ids.push_back(std::move(n));
            list.labels.push_back(0);
        }
        // deterministic shuffle so the gold is not always first
        std::vector<size_t> perm(list.doc_ids.size());
        for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
        rng.shuffle(perm);
        RerankList shuffled = list;
        for (size_t i = 0; i < perm.size(); ++i) {
            shuffled.doc_ids[i] = list.doc_ids[perm[i]];
            shuffled.labels[i] = list.labels[perm[i]];
        }
        ++local.emitted;
        lists.push_back(std::move(shuffled));
    }
    if (stats) *stats = local;
    return lists;
}

}  // namespace hare
