// Python bindings for the main operations: tokenization, indexing and
// search, dense retrieval, metrics, and full refinement sessions.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "hare/dense.hpp"
#include "hare/environment.hpp"
#include "hare/evaluation.hpp"
#include "hare/expanders.hpp"
#include "hare/index.hpp"
#include "hare/query.hpp"
#include "hare/scoring.hpp"
#include "hare/session.hpp"
#include "hare/tokenize.hpp"

namespace py = pybind11;
using namespace hare;

namespace {

std::vector<std::tuple<std::string, double>> as_pairs(const std::vector<ScoredDoc>& docs) {
    std::vector<std::tuple<std::string, double>> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.emplace_back(d.id, d.score);
    return out;
}

Qrels qrels_from_dict(const std::map<std::string, std::map<std::string, int>>& gains) {
    Qrels q;
    q.gains = gains;
    return q;
}

// Retrieval environment owning its dense parts; the index is borrowed from
// the Python-side Index object (kept alive by the binding).
struct SearchEnv {
    EnvKind kind = EnvKind::Hybrid;
    const InvertedIndex* index = nullptr;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<DenseIndex> dense;

    SearchEnv(const InvertedIndex& idx, const std::string& kind_name, int dim,
              const std::string& embeddings) {
        kind = env_kind_from_string(kind_name);
        index = &idx;
        if (kind != EnvKind::Bm25) {
            embedder = std::make_unique<Embedder>(embeddings.empty()
                                                      ? Embedder::feature_hash(dim)
                                                      : Embedder::precomputed(embeddings));
            dense = std::make_unique<DenseIndex>(DenseIndex::build(idx.docs(), *embedder));
        }
    }

    Environment env() const { return {kind, index, dense.get(), embedder.get()}; }
};

std::unique_ptr<Scorer> scorer_by_name(const std::string& name, const InvertedIndex& index,
                                       const Qrels& qrels, const std::string& query_id) {
    if (name == "lexical") return std::make_unique<LexicalScorer>(index);
    if (name == "oracle") {
        if (!qrels.for_query(query_id))
            throw std::invalid_argument("oracle scorer: no qrels for query " + query_id);
        return std::make_unique<OracleScorer>(qrels, query_id);
    }
    throw std::invalid_argument("unknown scorer: " + name);
}

py::dict session_result_to_dict(const SessionResult& r) {
    py::dict out;
    out["final"] = as_pairs(r.final_aggregate);
    py::list queries, refinements, ndcg;
    for (const auto& step : r.trace) {
        queries.append(step.query);
        refinements.append(step.refinement ? py::object(py::str(*step.refinement))
                                           : py::object(py::none()));
        ndcg.append(step.ndcg10 ? py::object(py::float_(*step.ndcg10))
                                : py::object(py::none()));
    }
    out["queries"] = queries;
    out["refinements"] = refinements;
    out["ndcg10"] = ndcg;
    out["termination"] = to_string(r.termination);
    out["docs_scored"] = r.docs_scored;
    out["dense_calls"] = r.dense_calls;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "hybrid retrieval environments and search-agent sessions";

    m.def("tokenize", &tokenize, py::arg("text"),
          "Lowercase and split on non-alphanumeric bytes.");
    m.def(
        "fnv1a64", [](const std::string& s) { return fnv1a64(s); }, py::arg("text"),
        "64-bit FNV-1a hash used by the feature-hashing embedder.");
    m.def(
        "ndcg_at_k",
        [](const std::vector<std::string>& ranking, const std::map<std::string, int>& gains,
           int k) { return ndcg_at_k(ranking, gains, k); },
        py::arg("ranking"), py::arg("gains"), py::arg("k") = 10,
        "nDCG@k with exponential gains; the ideal uses all judged documents.");
    m.def("listwise_softmax_ce", &listwise_softmax_ce, py::arg("labels"), py::arg("scores"),
          "Listwise softmax cross-entropy; labels hold exactly one 1.");
    m.def(
        "load_qrels",
        [](const std::string& path) { return load_qrels(path).gains; }, py::arg("path"),
        "Parse TREC qrels into {query_id: {doc_id: gain}}.");
    m.def(
        "render_query",
        [](const std::string& text) { return render_query(parse_query(text)); },
        py::arg("text"), "Parse operator syntax and render it back in canonical order.");

    py::class_<InvertedIndex>(m, "Index", "BM25 inverted index with operator-aware search.")
        .def_static(
            "build",
            [](const std::vector<std::tuple<std::string, std::string, std::string>>& docs,
               double k1, double b) {
                std::vector<Document> converted;
                converted.reserve(docs.size());
                for (const auto& [id, title, text] : docs)
                    converted.push_back({id, title, text, 0});
                InvertedIndex::Params params;
                params.k1 = k1;
                params.b = b;
                return InvertedIndex::build(std::move(converted), params);
            },
            py::arg("docs"), py::arg("k1") = 0.9, py::arg("b") = 0.4,
            "Build from (id, title, text) tuples.")
        .def_static(
            "from_jsonl",
            [](const std::string& path, double k1, double b) {
                InvertedIndex::Params params;
                params.k1 = k1;
                params.b = b;
                return InvertedIndex::from_jsonl(path, params);
            },
            py::arg("path"), py::arg("k1") = 0.9, py::arg("b") = 0.4,
            "Build from BEIR-style corpus JSONL (_id, title, text).")
        .def_static("load", &InvertedIndex::load, py::arg("dir"))
        .def("save", &InvertedIndex::save, py::arg("dir"))
        .def_property_readonly("doc_count", &InvertedIndex::doc_count)
        .def_property_readonly("avg_doc_length", &InvertedIndex::avg_doc_length)
        .def("df", &InvertedIndex::df, py::arg("term"))
        .def("idf", &InvertedIndex::idf, py::arg("term"))
        .def(
            "search",
            [](const InvertedIndex& idx, const std::string& query, int k) {
                return as_pairs(idx.search(parse_query(query), k));
            },
            py::arg("query"), py::arg("k") = 10,
            "BM25 top-k for a query with optional +term / -term / term^f operators.");

    py::class_<Embedder>(m, "Embedder", "Deterministic dense-encoder stand-in.")
        .def_static("feature_hash", &Embedder::feature_hash, py::arg("dim"))
        .def_static("precomputed", &Embedder::precomputed, py::arg("jsonl_path"))
        .def("embed", &Embedder::embed, py::arg("text"))
        .def_property_readonly("dim", &Embedder::dim);

    py::class_<SearchEnv>(m, "SearchEnv",
                          "One-shot retrieval environment: bm25, dense, or hybrid.")
        .def(py::init<const InvertedIndex&, const std::string&, int, const std::string&>(),
             py::arg("index"), py::arg("kind") = "hybrid", py::arg("dim") = 64,
             py::arg("embeddings") = "", py::keep_alive<1, 2>())
        .def(
            "retrieve",
            [](const SearchEnv& e, const std::string& query, int k) {
                auto env = e.env();
                return as_pairs(retrieve(env, parse_query(query), k));
            },
            py::arg("query"), py::arg("k") = 10);

    m.def(
        "run_search_session",
        [](const SearchEnv& env, const std::string& query_id, const std::string& q0,
           const std::string& scorer, const std::string& expander,
           const std::map<std::string, std::map<std::string, int>>& qrels_gains, int k,
           int k_agg, int max_steps, int top_k, double lambda) {
            Qrels qrels = qrels_from_dict(qrels_gains);
            bool have_qrels = !qrels.gains.empty();
            auto f = scorer_by_name(scorer, *env.index, qrels, query_id);
            SessionConfig cfg;
            cfg.k = k;
            cfg.k_agg = k_agg;
            cfg.max_steps = max_steps;
            cfg.top_k = top_k;
            Session s(*env.index, env.dense.get(), env.embedder.get(), env.kind, *f, query_id,
                      q0, cfg);
            std::unique_ptr<Expander> ex;
            if (expander == "none") {
                ex = std::make_unique<NullExpander>();
            } else if (expander == "rm3") {
                Rm3Options opt;
                opt.lambda = lambda;
                ex = std::make_unique<Rm3Expander>(opt);
            } else if (expander == "rocchio") {
                if (!have_qrels)
                    throw std::invalid_argument("rocchio expander needs qrels");
                ex = std::make_unique<RocchioExpander>(qrels);
            } else {
                throw std::invalid_argument("unknown expander: " + expander);
            }
            auto result = run_session(s, *ex, have_qrels ? &qrels : nullptr);
            return session_result_to_dict(result);
        },
        py::arg("env"), py::arg("query_id"), py::arg("q0"), py::arg("scorer") = "lexical",
        py::arg("expander") = "none",
        py::arg("qrels") = std::map<std::string, std::map<std::string, int>>{},
        py::arg("k") = 10, py::arg("k_agg") = 10, py::arg("max_steps") = 5,
        py::arg("top_k") = 1000, py::arg("lambda_") = 0.5,
        "Run one refinement session and return its trace as a dict.");
}
