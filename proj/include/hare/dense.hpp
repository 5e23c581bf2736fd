#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hare/types.hpp"

namespace hare {

// FNV-1a, 64-bit, with the standard offset basis as fixed seed. The embedder
// contract depends on this exact function; do not swap it out.
uint64_t fnv1a64(std::string_view s);

// Deterministic embedding stand-in for a neural dense encoder.
class Embedder {
public:
    enum class Kind { FeatureHash, Precomputed };

    // Token counts folded into dim buckets at fnv1a64(token) % dim, then
    // L2-normalized (the zero vector stays zero).
    static Embedder feature_hash(int dim);

    // JSONL of {"key": string, "vector": [numbers]}; keys are doc ids or
    // verbatim query texts. All vectors must share one dimension.
    static Embedder precomputed(const std::string& jsonl_path);

    // Throws std::runtime_error naming the key on a precomputed miss.
    std::vector<double> embed(const std::string& text) const;

    int dim() const { return dim_; }
    Kind kind() const { return kind_; }

private:
    Kind kind_ = Kind::FeatureHash;
    int dim_ = 0;
    std::map<std::string, std::vector<double>> table_;
};

// Exact brute-force maximum inner product search over per-doc vectors.
class DenseIndex {
public:
    static DenseIndex build(const std::vector<Document>& docs, const Embedder& emb);
    static DenseIndex from_vectors(std::map<std::string, std::vector<double>> vectors);

    // Top-k by inner product, ties by ascending doc id; k > size returns all.
    // Throws std::invalid_argument on dimension mismatch or k < 1.
    std::vector<ScoredDoc> search(const std::vector<double>& query, int k) const;

    int size() const { return static_cast<int>(ids_.size()); }
    int dim() const { return dim_; }
    const std::vector<std::string>& ids() const { return ids_; }

private:
    int dim_ = 0;
    std::vector<std::string> ids_;  // ascending
    std::vector<std::vector<double>> vecs_;  // parallel to ids_
};

}  // namespace hare
