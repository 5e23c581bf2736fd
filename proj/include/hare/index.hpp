#pragma once

#include <map>
#include <string>
#include <vector>

#include "hare/types.hpp"

namespace hare {

// In-memory inverted index over a frozen corpus, with BM25 scoring.
//
// Scoring uses the Lucene-style variant:
//   idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))
//   contribution(t, d) = idf(t) * tf / (tf + k1 * (1 - b + b * len/avg_len))
// Documents are indexed as a single field (title joined with text).
class InvertedIndex {
public:
    struct Params {
        double k1 = 0.9;
        double b = 0.4;
    };

    struct Posting {
        int doc = 0;  // ordinal into docs()
        int tf = 0;
    };

    // Throws std::invalid_argument on duplicate or empty doc ids.
    static InvertedIndex build(std::vector<Document> docs, Params params);
    static InvertedIndex build(std::vector<Document> docs) { return build(std::move(docs), Params{}); }

    // BEIR-style corpus JSONL: one object per line with _id, title, text.
    static InvertedIndex from_jsonl(const std::string& path, Params params);
    static InvertedIndex from_jsonl(const std::string& path) { return from_jsonl(path, Params{}); }

    // Persists to <dir>/index.hare, a self-describing versioned text file.
    // save(load(dir)) writes byte-identical content.
    void save(const std::string& dir) const;
    static InvertedIndex load(const std::string& dir);

    int doc_count() const { return static_cast<int>(docs_.size()); }
    double avg_doc_length() const { return avg_doc_length_; }
    const Params& params() const { return params_; }

    const std::vector<Document>& docs() const { return docs_; }
    const Document& doc(int ord) const { return docs_[ord]; }
    // nullptr when absent.
    const Document* find_doc(const std::string& id) const;
    int ord_of(const std::string& id) const;  // -1 when absent

    int df(const std::string& term) const;
    double idf(const std::string& term) const;  // 0 for unseen terms
    // Deterministic per-doc term counts of the indexed field.
    const std::map<std::string, int>& doc_terms(int ord) const { return doc_terms_[ord]; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }

    // Top-k by BM25 with operator clause and id-restriction semantics:
    // base, MUST and BOOST terms score (duplicates each contribute); MUST
    // filters to docs containing the term; MUST_NOT drops docs containing it;
    // restrict_ids limits candidates to the given set. Ties break by
    // ascending doc id. Throws std::invalid_argument for k < 1.
    std::vector<ScoredDoc> search(const StructuredQuery& q, int k) const;

private:
    Params params_;
    std::vector<Document> docs_;
    std::vector<std::map<std::string, int>> doc_terms_;
    std::map<std::string, int> id_to_ord_;
    std::map<std::string, std::vector<Posting>> postings_;
    double avg_doc_length_ = 0.0;

    void finalize();
};

}  // namespace hare
