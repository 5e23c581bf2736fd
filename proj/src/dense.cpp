#include "hare/dense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "hare/tokenize.hpp"

namespace hare {

uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Embedder Embedder::feature_hash(int dim) {
    if (dim < 1) throw std::invalid_argument("embedding dim must be >= 1");
    Embedder e;
    e.kind_ = Kind::FeatureHash;
    e.dim_ = dim;
    return e;
}

Embedder Embedder::precomputed(const std::string& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw std::runtime_error("cannot open embeddings file: " + jsonl_path);
    Embedder e;
    e.kind_ = Kind::Precomputed;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& err) {
            throw std::runtime_error(jsonl_path + ":" + std::to_string(lineno) +
                                     ": bad JSON: " + err.what());
        }
        std::string key = j.at("key").get<std::string>();
        std::vector<double> vec = j.at("vector").get<std::vector<double>>();
        if (e.dim_ == 0) e.dim_ = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != e.dim_ || e.dim_ == 0)
            throw std::runtime_error(jsonl_path + ":" + std::to_string(lineno) +
                                     ": vector dimension mismatch for key " + key);
        e.table_[key] = std::move(vec);
    }
    if (e.table_.empty()) throw std::runtime_error(jsonl_path + ": no embeddings");
    return e;
}

std::vector<double> Embedder::embed(const std::string& text) const {
    if (kind_ == Kind::Precomputed) {
        auto it = table_.find(text);
        if (it == table_.end())
            throw std::runtime_error("no precomputed embedding for key: " + text);
        return it->second;
    }
    std::vector<double> v(dim_, 0.0);
    for (const auto& t : tokenize(text)) v[fnv1a64(t) % dim_] += 1.0;
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    if (norm2 > 0.0) {
        double inv = 1.0 / std::sqrt(norm2);
        for (double& x : v) x *= inv;
    }
    return v;
}

DenseIndex DenseIndex::build(const std::vector<Document>& docs, const Embedder& emb) {
    std::map<std::string, std::vector<double>> vectors;
    for (const auto& d : docs) {
        std::string field = d.title.empty() ? d.text : d.title + " " + d.text;
        // Precomputed doc vectors are keyed by id, hashed ones by content.
        vectors[d.id] = emb.kind() == Embedder::Kind::Precomputed ? emb.embed(d.id)
                                                                  : emb.embed(field);
    }
    return from_vectors(std::move(vectors));
}

DenseIndex DenseIndex::from_vectors(std::map<std::string, std::vector<double>> vectors) {
    DenseIndex idx;
    for (auto& [id, vec] : vectors) {
        if (idx.dim_ == 0) idx.dim_ = static_cast<int>(vec.size());
        if (static_cast<int>(vec.size()) != idx.dim_)
            throw std::invalid_argument("vector dimension mismatch for doc " + id);
        idx.ids_.push_back(id);
        idx.vecs_.push_back(std::move(vec));
    }
    return idx;
}

std::vector<ScoredDoc> DenseIndex::search(const std::vector<double>& query, int k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (static_cast<int>(query.size()) != dim_)
        throw std::invalid_argument("query dimension " + std::to_string(query.size()) +
                                    " does not match index dimension " + std::to_string(dim_));
    std::vector<std::pair<double, int>> scored;
    scored.reserve(ids_.size());
    for (size_t i = 0; i < vecs_.size(); ++i) {
        double dot = 0.0;
        const auto& v = vecs_[i];
        for (int d = 0; d < dim_; ++d) dot += query[d] * v[d];
        scored.emplace_back(dot, static_cast<int>(i));
    }
    // ids_ is ascending, so equal scores already tie-break by doc id.
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    if (static_cast<int>(scored.size()) > k) scored.resize(k);
    std::vector<ScoredDoc> out;
    out.reserve(scored.size());
    for (size_t i = 0; i < scored.size(); ++i)
        out.push_back({ids_[scored[i].second], scored[i].first, Source::Dense,
                       static_cast<int>(i) + 1});
    return out;
}

}  // namespace hare
