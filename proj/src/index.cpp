#include "hare/index.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "hare/tokenize.hpp"

namespace hare {

namespace {
constexpr const char* kIndexFile = "index.hare";
constexpr const char* kMagic = "hare-index 1";

std::string indexed_field(const Document& d) {
    if (d.title.empty()) return d.text;
    return d.title + " " + d.text;
}
}  // namespace

InvertedIndex InvertedIndex::build(std::vector<Document> docs, Params params) {
    InvertedIndex idx;
    idx.params_ = params;
    idx.docs_ = std::move(docs);
    idx.finalize();
    return idx;
}

void InvertedIndex::finalize() {
    doc_terms_.clear();
    id_to_ord_.clear();
    postings_.clear();
    doc_terms_.reserve(docs_.size());

    long long total_len = 0;
    for (int ord = 0; ord < static_cast<int>(docs_.size()); ++ord) {
        Document& d = docs_[ord];
        if (d.id.empty()) throw std::invalid_argument("document with empty id");
        if (!id_to_ord_.emplace(d.id, ord).second)
            throw std::invalid_argument("duplicate doc id: " + d.id);
        std::map<std::string, int> counts;
        for (auto& t : tokenize(indexed_field(d))) ++counts[t];
        d.length = 0;
        for (const auto& [t, tf] : counts) d.length += tf;
        total_len += d.length;
        doc_terms_.push_back(std::move(counts));
    }
    avg_doc_length_ = docs_.empty() ? 0.0 : static_cast<double>(total_len) / docs_.size();

    for (int ord = 0; ord < static_cast<int>(docs_.size()); ++ord)
        for (const auto& [t, tf] : doc_terms_[ord]) postings_[t].push_back({ord, tf});
    for (auto& [t, plist] : postings_)
        std::sort(plist.begin(), plist.end(), [this](const Posting& a, const Posting& b) {
            return docs_[a.doc].id < docs_[b.doc].id;
        });
}

InvertedIndex InvertedIndex::from_jsonl(const std::string& path, Params params) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<Document> docs;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad JSON: " + e.what());
        }
        if (!j.contains("_id"))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing _id");
        Document d;
        d.id = j["_id"].is_string() ? j["_id"].get<std::string>() : j["_id"].dump();
        d.title = j.value("title", std::string());
        d.text = j.value("text", std::string());
        docs.push_back(std::move(d));
    }
    return build(std::move(docs), params);
}

const Document* InvertedIndex::find_doc(const std::string& id) const {
    auto it = id_to_ord_.find(id);
    return it == id_to_ord_.end() ? nullptr : &docs_[it->second];
}

int InvertedIndex::ord_of(const std::string& id) const {
    auto it = id_to_ord_.find(id);
    return it == id_to_ord_.end() ? -1 : it->second;
}

int InvertedIndex::df(const std::string& term) const {
    auto it = postings_.find(term);
    return it == postings_.end() ? 0 : static_cast<int>(it->second.size());
}

double InvertedIndex::idf(const std::string& term) const {
    int df_t = df(term);
    if (df_t == 0) return 0.0;
    double n = static_cast<double>(doc_count());
    return std::log(1.0 + (n - df_t + 0.5) / (df_t + 0.5));
}

std::vector<ScoredDoc> InvertedIndex::search(const StructuredQuery& q, int k) const {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (q.restrict_ids && q.restrict_ids->empty())
        throw std::invalid_argument("restrict_ids present but empty");
    if (docs_.empty()) return {};

    // Scoring terms in contribution order: base terms, then MUST and BOOST
    // clauses as written (duplicates contribute once per occurrence).
    std::vector<std::pair<std::string, double>> scoring;
    for (const auto& t : q.base_terms) scoring.emplace_back(t, 1.0);
    for (const auto& c : q.clauses) {
        if (c.op == ClauseOp::Must) scoring.emplace_back(c.term, 1.0);
        else if (c.op == ClauseOp::Boost) scoring.emplace_back(c.term, c.boost);
    }
    if (scoring.empty()) return {};

    std::set<int> forbidden;
    std::vector<std::set<int>> must_sets;
    for (const auto& c : q.clauses) {
        if (c.op == ClauseOp::Must) {
            std::set<int> s;
            if (auto it = postings_.find(c.term); it != postings_.end())
                for (const auto& p : it->second) s.insert(p.doc);
            must_sets.push_back(std::move(s));
        } else if (c.op == ClauseOp::MustNot) {
            if (auto it = postings_.find(c.term); it != postings_.end())
                for (const auto& p : it->second) forbidden.insert(p.doc);
        }
    }

    auto allowed = [&](int ord) {
        if (forbidden.count(ord)) return false;
        for (const auto& s : must_sets)
            if (!s.count(ord)) return false;
        if (q.restrict_ids && !q.restrict_ids->count(docs_[ord].id)) return false;
        return true;
    };

    std::unordered_map<int, double> acc;
    for (const auto& [term, weight] : scoring) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        double idf_t = idf(term);
        for (const auto& p : it->second) {
            if (!allowed(p.doc)) continue;
            double len = docs_[p.doc].length;
            double norm = params_.k1 * (1.0 - params_.b + params_.b * len / avg_doc_length_);
            acc[p.doc] += weight * idf_t * p.tf / (p.tf + norm);
        }
    }

    std::vector<std::pair<int, double>> ranked(acc.begin(), acc.end());
    std::sort(ranked.begin(), ranked.end(), [this](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return docs_[a.first].id < docs_[b.first].id;
    });
    if (static_cast<int>(ranked.size()) > k) ranked.resize(k);

    std::vector<ScoredDoc> out;
    out.reserve(ranked.size());
    for (size_t i = 0; i < ranked.size(); ++i)
        out.push_back({docs_[ranked[i].first].id, ranked[i].second, Source::Sparse,
                       static_cast<int>(i) + 1});
    return out;
}

void InvertedIndex::save(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    std::string path = (std::filesystem::path(dir) / kIndexFile).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write index file: " + path);
    out << kMagic << "\n";
    nlohmann::json p;
    p["k1"] = params_.k1;
    p["b"] = params_.b;
    p["ndocs"] = doc_count();
    out << p.dump() << "\n";
    for (const auto& d : docs_) {
        nlohmann::json j;
        j["_id"] = d.id;
        j["title"] = d.title;
        j["text"] = d.text;
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

InvertedIndex InvertedIndex::load(const std::string& dir) {
    std::string path = (std::filesystem::path(dir) / kIndexFile).string();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open index file: " + path);
    std::string line;
    if (!std::getline(in, line) || line != kMagic)
        throw std::runtime_error(path + ": not a recognized index file (bad header)");
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated index file");
    nlohmann::json p = nlohmann::json::parse(line);
    Params params{p.at("k1").get<double>(), p.at("b").get<double>()};
    int ndocs = p.at("ndocs").get<int>();

    std::vector<Document> docs;
    docs.reserve(ndocs);
    int lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": bad JSON: " + e.what());
        }
        docs.push_back({j.at("_id").get<std::string>(), j.at("title").get<std::string>(),
                        j.at("text").get<std::string>(), 0});
    }
    if (static_cast<int>(docs.size()) != ndocs)
        throw std::runtime_error(path + ": doc count mismatch (header says " +
                                 std::to_string(ndocs) + ", found " +
                                 std::to_string(docs.size()) + ")");
    return build(std::move(docs), params);
}

}  // namespace hare
