// Command-line front end: index building, search, agent sessions, oracle
// data generation, evaluation, depth sweeps, and trace analysis.
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hare/dense.hpp"
#include "hare/environment.hpp"
#include "hare/evaluation.hpp"
#include "hare/expanders.hpp"
#include "hare/index.hpp"
#include "hare/log.hpp"
#include "hare/model_client.hpp"
#include "hare/query.hpp"
#include "hare/scoring.hpp"
#include "hare/session.hpp"

namespace {

using namespace hare;

struct Options {
    std::string config;
    std::string corpus;
    std::string queries;
    std::string qrels;
    std::string index_dir;
    std::string embeddings;
    std::string model_cmd;
    std::string model_addr;
    std::string out;
    std::string run_file;
    std::string traces;
    std::string query_text;
    std::string env = "hybrid";
    std::string scorer = "lexical";
    std::string expander = "none";
    std::string preset = "ht";
    std::string tag = "hare";
    std::string depths = "1,5,10,20,50,100,1000";
    double k1 = 0.9;
    double b = 0.4;
    double lambda = 0.5;
    int k = 10;
    int k_agg = 10;
    int max_steps = 5;
    int top_k = 1000;
    int dim = 64;
    int m = 8;
    int budget = 0;  // 0 = take the preset's value
    uint64_t seed = 42;
};

// BEIR-style query file: one {"_id": ..., "text": ...} object per line.
std::vector<QueryRecord> load_queries(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open query file: " + path);
    std::vector<QueryRecord> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad JSON: " + line);
        if (!j.contains("_id") || !j.contains("text"))
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": query object needs _id and text");
        out.push_back({j["_id"].get<std::string>(), j["text"].get<std::string>()});
    }
    return out;
}

std::vector<int> parse_depths(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stoi(item));
    }
    if (out.empty()) throw std::runtime_error("no depths given");
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Line-oriented "key=value" config; keys are long flag names without the
// dashes. Values already given on the command line win.
void apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));
        auto* op = cmd->get_option_no_throw("--" + key);
        if (!op) op = cmd->get_option_no_throw(key);
        if (!op || op->get_name() == "--config")
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key: " +
                                     key);
        if (op->empty()) {
            op->add_result(value);
            op->run_callback();
        }
    }
}

// Dense retrieval parts, built on demand for the dense and hybrid wirings.
struct DenseParts {
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<DenseIndex> index;
};

DenseParts make_dense_parts(const Options& o, const InvertedIndex& index, EnvKind kind) {
    DenseParts parts;
    if (kind == EnvKind::Bm25) return parts;
    parts.embedder = std::make_unique<Embedder>(
        o.embeddings.empty() ? Embedder::feature_hash(o.dim)
                             : Embedder::precomputed(o.embeddings));
    parts.index = std::make_unique<DenseIndex>(DenseIndex::build(index.docs(), *parts.embedder));
    return parts;
}

std::unique_ptr<ModelClient> make_model_client(const Options& o) {
    if (!o.model_cmd.empty() && !o.model_addr.empty())
        throw std::runtime_error("give either --model-cmd or --model-addr, not both");
    if (!o.model_cmd.empty())
        return std::make_unique<ModelClient>(std::make_unique<ProcessTransport>(o.model_cmd));
    if (!o.model_addr.empty()) {
        auto colon = o.model_addr.rfind(':');
        if (colon == std::string::npos)
            throw std::runtime_error("--model-addr must look like host:port");
        std::string host = o.model_addr.substr(0, colon);
        int port = std::stoi(o.model_addr.substr(colon + 1));
        return std::make_unique<ModelClient>(std::make_unique<TcpTransport>(host, port));
    }
    throw std::runtime_error("external scorer/expander needs --model-cmd or --model-addr");
}

std::unique_ptr<Scorer> make_scorer(const Options& o, const InvertedIndex& index,
                                    const Qrels& qrels, bool have_qrels,
                                    const std::string& query_id, ModelClient* client) {
    if (o.scorer == "lexical") return std::make_unique<LexicalScorer>(index);
    if (o.scorer == "oracle") {
        if (!have_qrels) throw std::runtime_error("the oracle scorer needs --qrels");
        return std::make_unique<OracleScorer>(qrels, query_id);
    }
    if (o.scorer == "external") return std::make_unique<ExternalScorer>(*client);
    throw std::runtime_error("unknown scorer: " + o.scorer);
}

std::unique_ptr<Expander> make_expander(const Options& o, const Qrels& qrels, bool have_qrels,
                                        ModelClient* client) {
    if (o.expander == "none") return std::make_unique<NullExpander>();
    if (o.expander == "rocchio") {
        if (!have_qrels) throw std::runtime_error("the rocchio expander needs --qrels");
        return std::make_unique<RocchioExpander>(qrels);
    }
    if (o.expander == "rm3") {
        Rm3Options opt;
        opt.lambda = o.lambda;
        return std::make_unique<Rm3Expander>(opt);
    }
    if (o.expander == "external") return std::make_unique<ExternalExpander>(*client);
    throw std::runtime_error("unknown expander: " + o.expander);
}

bool needs_model(const Options& o) {
    return o.scorer == "external" || o.expander == "external";
}

int run_index(const Options& o) {
    InvertedIndex::Params params;
    params.k1 = o.k1;
    params.b = o.b;
    auto index = InvertedIndex::from_jsonl(o.corpus, params);
    index.save(o.index_dir);
    std::printf("indexed %d docs -> %s\n", index.doc_count(), o.index_dir.c_str());
    return 0;
}

int run_search(const Options& o) {
    auto index = InvertedIndex::load(o.index_dir);
    EnvKind kind = env_kind_from_string(o.env);
    auto parts = make_dense_parts(o, index, kind);
    Environment env{kind, &index, parts.index.get(), parts.embedder.get()};
    auto hits = retrieve(env, parse_query(o.query_text), o.k);
    for (size_t i = 0; i < hits.size(); ++i)
        std::printf("%zu %s %.6f\n", i + 1, hits[i].id.c_str(), hits[i].score);
    return 0;
}

int run_session_cmd(const Options& o) {
    auto index = InvertedIndex::load(o.index_dir);
    auto queries = load_queries(o.queries);
    Qrels qrels;
    bool have_qrels = !o.qrels.empty();
    if (have_qrels) qrels = load_qrels(o.qrels);
    EnvKind kind = env_kind_from_string(o.env);
    auto parts = make_dense_parts(o, index, kind);
    std::unique_ptr<ModelClient> client;
    if (needs_model(o)) client = make_model_client(o);

    SessionConfig cfg;
    cfg.k = o.k;
    cfg.k_agg = o.k_agg;
    cfg.max_steps = o.max_steps;
    cfg.top_k = o.top_k;

    std::ofstream trace_out(o.out + ".trace.jsonl", std::ios::binary);
    if (!trace_out) throw std::runtime_error("cannot write trace file: " + o.out + ".trace.jsonl");

    std::map<std::string, std::vector<ScoredDoc>> runs;
    EvalReport report;
    double ndcg_sum = 0.0;
    double docs_scored_sum = 0.0;
    std::map<int, std::pair<double, int>> wall_by_step;
    for (const auto& q : queries) {
        auto scorer = make_scorer(o, index, qrels, have_qrels, q.id, client.get());
        auto expander = make_expander(o, qrels, have_qrels, client.get());
        Session s(index, parts.index.get(), parts.embedder.get(), kind, *scorer, q.id, q.text,
                  cfg);
        auto result = run_session(s, *expander, have_qrels ? &qrels : nullptr);
        trace_out << trace_to_jsonl(q.id, result.trace);
        runs[q.id] = result.final_aggregate;
        docs_scored_sum += result.docs_scored;
        for (const auto& step : result.trace) {
            auto& [sum, n] = wall_by_step[step.t];
            sum += step.wall_ms;
            ++n;
        }
        if (!result.trace.empty() && result.trace.back().ndcg10) {
            report.per_query_ndcg10[q.id] = *result.trace.back().ndcg10;
            ndcg_sum += *result.trace.back().ndcg10;
            ++report.num_queries;
        } else {
            ++report.skipped_no_qrels;
        }
        HARE_INFO("session %s: %d steps, %s", q.id.c_str(),
                  static_cast<int>(result.trace.size()) - 1,
                  to_string(result.termination).c_str());
    }
    if (report.num_queries > 0) report.mean_ndcg10 = ndcg_sum / report.num_queries;
    if (!queries.empty()) report.docs_scored_mean = docs_scored_sum / queries.size();
    for (const auto& [t, acc] : wall_by_step)
        report.step_wall_ms_mean[t] = acc.first / acc.second;

    write_run(o.out + ".run", runs, o.tag);
    write_text_file(o.out + ".report.json", report_to_json(report));
    std::fputs(report_to_text(report).c_str(), stdout);
    return 0;
}

int run_rocchio(const Options& o) {
    auto index = InvertedIndex::load(o.index_dir);
    auto queries = load_queries(o.queries);
    auto qrels = load_qrels(o.qrels);
    EnvKind kind = env_kind_from_string(o.env);
    auto parts = make_dense_parts(o, index, kind);
    std::unique_ptr<ModelClient> client;
    if (needs_model(o)) client = make_model_client(o);

    SessionConfig cfg;
    cfg.k = o.k;
    cfg.k_agg = o.k_agg;
    cfg.max_steps = o.max_steps;
    cfg.top_k = o.top_k;

    RocchioOptions opt;
    opt.per_op_budget = o.budget > 0 ? o.budget : (o.preset == "hq" ? 100 : 20);

    std::ofstream trace_out(o.out + ".trace.jsonl", std::ios::binary);
    std::ofstream bc_out(o.out + ".bc.jsonl", std::ios::binary);
    if (!trace_out || !bc_out)
        throw std::runtime_error("cannot write outputs under prefix: " + o.out);

    std::map<std::string, std::vector<ScoredDoc>> runs;
    nlohmann::json per_query = nlohmann::json::object();
    double before_sum = 0.0, after_sum = 0.0;
    int judged = 0, skipped = 0, improved = 0, examples_total = 0;
    for (const auto& q : queries) {
        if (!qrels.for_query(q.id)) {
            ++skipped;
            continue;
        }
        auto scorer = make_scorer(o, index, qrels, true, q.id, client.get());
        Session s(index, parts.index.get(), parts.embedder.get(), kind, *scorer, q.id, q.text,
                  cfg);
        auto result = rocchio_session(s, qrels, opt);
        trace_out << trace_to_jsonl(q.id, result.session.trace);
        bc_out << bc_examples_to_jsonl(result.examples);
        runs[q.id] = result.session.final_aggregate;
        double before = *result.session.trace.front().ndcg10;
        before_sum += before;
        after_sum += result.final_ndcg10;
        ++judged;
        if (result.improved) ++improved;
        examples_total += static_cast<int>(result.examples.size());
        per_query[q.id] = {{"ndcg10_step0", before},
                           {"ndcg10_final", result.final_ndcg10},
                           {"steps_accepted", result.examples.size()}};
    }
    write_run(o.out + ".run", runs, o.tag);

    nlohmann::json headroom;
    headroom["queries"] = judged;
    headroom["skipped_no_qrels"] = skipped;
    headroom["mean_ndcg10_step0"] = judged ? before_sum / judged : 0.0;
    headroom["mean_ndcg10_final"] = judged ? after_sum / judged : 0.0;
    headroom["sessions_improved"] = improved;
    headroom["examples"] = examples_total;
    headroom["per_query"] = per_query;
    write_text_file(o.out + ".headroom.json", headroom.dump(2) + "\n");

    std::printf("queries judged:     %d (skipped: %d)\n", judged, skipped);
    std::printf("mean nDCG@10 step0: %.4f\n", judged ? before_sum / judged : 0.0);
    std::printf("mean nDCG@10 final: %.4f\n", judged ? after_sum / judged : 0.0);
    std::printf("sessions improved:  %d\n", improved);
    std::printf("examples written:   %d\n", examples_total);
    return 0;
}

int run_eval(const Options& o) {
    auto runs = load_run(o.run_file);
    auto qrels = load_qrels(o.qrels);
    EvalReport report;
    double sum = 0.0;
    for (const auto& [qid, docs] : runs) {
        const auto* gains = qrels.for_query(qid);
        if (!gains) {
            ++report.skipped_no_qrels;
            continue;
        }
        std::vector<std::string> ids;
        for (const auto& d : docs) ids.push_back(d.id);
        double v = ndcg_at_k(ids, *gains, 10);
        report.per_query_ndcg10[qid] = v;
        sum += v;
        ++report.num_queries;
    }
    if (report.num_queries > 0) report.mean_ndcg10 = sum / report.num_queries;
    if (!o.out.empty()) write_text_file(o.out, report_to_json(report));
    std::fputs(report_to_text(report).c_str(), stdout);
    return 0;
}

int run_sweep(const Options& o) {
    auto index = InvertedIndex::load(o.index_dir);
    auto queries = load_queries(o.queries);
    auto qrels = load_qrels(o.qrels);
    EnvKind kind = env_kind_from_string(o.env);
    auto parts = make_dense_parts(o, index, kind);
    std::unique_ptr<ModelClient> client;
    if (o.scorer == "external") client = make_model_client(o);
    Environment env{kind, &index, parts.index.get(), parts.embedder.get()};

    auto factory = [&](const std::string& query_id) {
        return make_scorer(o, index, qrels, true, query_id, client.get());
    };
    auto result = depth_sweep(env, queries, qrels, parse_depths(o.depths), factory);
    auto csv = sweep_to_csv(result);
    write_text_file(o.out, csv);
    std::fputs(csv.c_str(), stdout);
    if (result.skipped_no_qrels > 0)
        std::printf("skipped (no qrels): %d\n", result.skipped_no_qrels);
    return 0;
}

int run_analyze(const Options& o) {
    std::ifstream in(o.traces, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file: " + o.traces);
    auto qrels = load_qrels(o.qrels);

    // Group trace lines by query in file order.
    struct QueryTrace {
        std::vector<std::vector<std::string>> aggregate_ids;
        std::vector<std::string> first_retrieved;
    };
    std::vector<std::string> order;
    std::map<std::string, QueryTrace> traces;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw std::runtime_error(o.traces + ":" + std::to_string(lineno) + ": bad JSON: " +
                                     line);
        std::string qid = j["query_id"].get<std::string>();
        auto [it, fresh] = traces.try_emplace(qid);
        if (fresh) order.push_back(qid);
        if (j["t"].get<int>() == 0)
            it->second.first_retrieved = j["retrieved_ids"].get<std::vector<std::string>>();
        it->second.aggregate_ids.push_back(j["aggregate_ids"].get<std::vector<std::string>>());
    }

    std::vector<std::vector<double>> per_step_ndcg;
    std::vector<int> depth_counts;
    std::vector<std::string> depth_labels;
    int skipped = 0;
    for (const auto& qid : order) {
        const auto* gains = qrels.for_query(qid);
        const auto& tr = traces[qid];
        if (!gains || tr.aggregate_ids.empty()) {
            ++skipped;
            continue;
        }
        std::vector<double> ndcgs;
        for (const auto& agg : tr.aggregate_ids) ndcgs.push_back(ndcg_at_k(agg, *gains, 10));
        per_step_ndcg.push_back(std::move(ndcgs));

        std::map<std::string, int> depth_by_id;
        for (size_t i = 0; i < tr.first_retrieved.size(); ++i)
            depth_by_id[tr.first_retrieved[i]] = static_cast<int>(i) + 1;
        auto hist = depth_buckets(tr.aggregate_ids.back(), depth_by_id);
        if (depth_counts.empty()) {
            depth_labels = hist.labels;
            depth_counts.assign(hist.labels.size(), 0);
        }
        for (size_t i = 0; i < hist.counts.size(); ++i) depth_counts[i] += hist.counts[i];
    }

    auto outcomes = outcome_analysis(per_step_ndcg);
    std::printf("queries analyzed: %d (skipped, no qrels: %d)\n", outcomes.total, skipped);
    std::printf("outcomes:\n");
    std::printf("  solved at step 0:  %d\n", outcomes.solved_at_q0);
    for (const auto& [step, n] : outcomes.improved_at_step)
        std::printf("  improved at step %d: %d\n", step, n);
    std::printf("  unchanged:         %d\n", outcomes.unchanged);
    std::printf("  worse:             %d\n", outcomes.worse);
    int depth_total = 0;
    for (int c : depth_counts) depth_total += c;
    std::printf("final-doc depth in the initial ranking:\n");
    for (size_t i = 0; i < depth_labels.size(); ++i)
        std::printf("  %-13s %d (%.1f%%)\n", (depth_labels[i] + ":").c_str(), depth_counts[i],
                    depth_total ? 100.0 * depth_counts[i] / depth_total : 0.0);

    if (!o.out.empty()) {
        nlohmann::json j;
        j["queries"] = outcomes.total;
        j["skipped_no_qrels"] = skipped;
        j["outcomes"]["solved_at_q0"] = outcomes.solved_at_q0;
        j["outcomes"]["unchanged"] = outcomes.unchanged;
        j["outcomes"]["worse"] = outcomes.worse;
        nlohmann::json by_step = nlohmann::json::object();
        for (const auto& [step, n] : outcomes.improved_at_step)
            by_step[std::to_string(step)] = n;
        j["outcomes"]["improved_at_step"] = by_step;
        nlohmann::json depth = nlohmann::json::object();
        for (size_t i = 0; i < depth_labels.size(); ++i) depth[depth_labels[i]] = depth_counts[i];
        j["depth"] = depth;
        write_text_file(o.out, j.dump(2) + "\n");
    }
    return 0;
}

int run_lists(const Options& o) {
    auto index = InvertedIndex::load(o.index_dir);
    auto queries = load_queries(o.queries);
    auto qrels = load_qrels(o.qrels);
    RerankListStats stats;
    auto lists = build_rerank_lists(index, queries, qrels, o.k, o.m, o.seed, &stats);
    std::ofstream out(o.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + o.out);
    for (const auto& l : lists) {
        nlohmann::json j;
        j["query_id"] = l.query_id;
        j["query"] = l.query;
        j["doc_ids"] = l.doc_ids;
        j["labels"] = l.labels;
        j["short_of_negatives"] = l.short_of_negatives;
        out << j.dump() << "\n";
    }
    std::printf("queries:            %d\n", stats.total_queries);
    std::printf("lists emitted:      %d\n", stats.emitted);
    std::printf("gold outside top-k: %d\n", stats.skipped_no_gold_in_topk);
    std::printf("short of negatives: %d\n", stats.short_of_negatives);
    return 0;
}

void add_dense_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--embeddings", o.embeddings,
                    "precomputed vectors JSONL (default: feature hashing)");
    cmd->add_option("--dim", o.dim, "feature-hash dimension")->check(CLI::PositiveNumber);
}

void add_model_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--model-cmd", o.model_cmd, "external model command (NDJSON over pipes)");
    cmd->add_option("--model-addr", o.model_addr, "external model address host:port");
}

void add_session_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--env", o.env, "environment wiring")
        ->check(CLI::IsMember({"bm25", "dense", "hybrid"}));
    cmd->add_option("--k", o.k, "retrieval depth per step")->check(CLI::PositiveNumber);
    cmd->add_option("--k-agg", o.k_agg, "aggregate size")->check(CLI::PositiveNumber);
    cmd->add_option("--max-steps", o.max_steps, "refinement step budget")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--top-k", o.top_k, "frozen dense sub-collection size")
        ->check(CLI::PositiveNumber);
    add_dense_flags(cmd, o);
    add_model_flags(cmd, o);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid retrieval with search-agent sessions"};
    app.require_subcommand(1);
    Options o;

    auto* c_index = app.add_subcommand("index", "build and persist an index from corpus JSONL");
    c_index->add_option("--corpus", o.corpus, "corpus JSONL (_id, title, text) [required]");
    c_index->add_option("--index-dir", o.index_dir, "output directory [required]");
    c_index->add_option("--k1", o.k1, "BM25 k1");
    c_index->add_option("--b", o.b, "BM25 b");

    auto* c_search = app.add_subcommand("search", "run one query and print the ranking");
    c_search->add_option("--index-dir", o.index_dir, "index directory [required]");
    c_search->add_option("query", o.query_text, "query text (operators allowed) [required]");
    c_search->add_option("--k", o.k, "number of results")->check(CLI::PositiveNumber);
    c_search->add_option("--env", o.env, "environment wiring")
        ->check(CLI::IsMember({"bm25", "dense", "hybrid"}));
    add_dense_flags(c_search, o);

    auto* c_session = app.add_subcommand("session", "run agent sessions over a query file");
    c_session->add_option("--index-dir", o.index_dir, "index directory [required]");
    c_session->add_option("--queries", o.queries, "query JSONL (_id, text) [required]");
    c_session->add_option("--qrels", o.qrels, "TREC qrels (enables nDCG in traces)");
    c_session->add_option("--scorer", o.scorer, "aggregate scorer f(q0, d)")
        ->check(CLI::IsMember({"lexical", "oracle", "external"}));
    c_session->add_option("--expander", o.expander, "refinement proposer")
        ->check(CLI::IsMember({"none", "rocchio", "rm3", "external"}));
    c_session->add_option("--lambda", o.lambda, "rm3 interpolation weight");
    c_session->add_option("--tag", o.tag, "run-file tag");
    c_session->add_option("--out", o.out,
                          "output prefix (.trace.jsonl, .run, .report.json) [required]");
    add_session_flags(c_session, o);

    auto* c_rocchio =
        app.add_subcommand("rocchio", "oracle sessions: behavior-cloning data + headroom");
    c_rocchio->add_option("--index-dir", o.index_dir, "index directory [required]");
    c_rocchio->add_option("--queries", o.queries, "query JSONL (_id, text) [required]");
    c_rocchio->add_option("--qrels", o.qrels, "TREC qrels [required]");
    c_rocchio->add_option("--scorer", o.scorer, "aggregate scorer f(q0, d)")
        ->check(CLI::IsMember({"lexical", "oracle", "external"}));
    c_rocchio->add_option("--preset", o.preset, "candidate budget preset: ht (20) or hq (100)")
        ->check(CLI::IsMember({"ht", "hq"}));
    c_rocchio->add_option("--budget", o.budget, "explicit per-operator candidate budget")
        ->check(CLI::PositiveNumber);
    c_rocchio->add_option("--tag", o.tag, "run-file tag");
    c_rocchio->add_option(
        "--out", o.out, "output prefix (.bc.jsonl, .trace.jsonl, .run, .headroom.json) [required]");
    add_session_flags(c_rocchio, o);

    auto* c_eval = app.add_subcommand("eval", "score a run file against qrels");
    c_eval->add_option("--run", o.run_file, "TREC run file [required]");
    c_eval->add_option("--qrels", o.qrels, "TREC qrels [required]");
    c_eval->add_option("--out", o.out, "write the report JSON here");

    auto* c_sweep = app.add_subcommand("sweep", "retrieve-then-rerank depth sweep CSV");
    c_sweep->add_option("--index-dir", o.index_dir, "index directory [required]");
    c_sweep->add_option("--queries", o.queries, "query JSONL (_id, text) [required]");
    c_sweep->add_option("--qrels", o.qrels, "TREC qrels [required]");
    c_sweep->add_option("--env", o.env, "environment wiring")
        ->check(CLI::IsMember({"bm25", "dense", "hybrid"}));
    c_sweep->add_option("--scorer", o.scorer, "reranking scorer")
        ->check(CLI::IsMember({"lexical", "oracle", "external"}));
    c_sweep->add_option("--depths", o.depths, "comma-separated retrieval depths");
    c_sweep->add_option("--out", o.out, "output CSV path [required]");
    add_dense_flags(c_sweep, o);
    add_model_flags(c_sweep, o);

    auto* c_analyze = app.add_subcommand("analyze", "outcome and depth analysis of trace files");
    c_analyze->add_option("--traces", o.traces, "trace JSONL from session/rocchio [required]");
    c_analyze->add_option("--qrels", o.qrels, "TREC qrels [required]");
    c_analyze->add_option("--out", o.out, "write the analysis JSON here");

    auto* c_lists = app.add_subcommand("lists", "sample reranker training lists");
    c_lists->add_option("--index-dir", o.index_dir, "index directory [required]");
    c_lists->add_option("--queries", o.queries, "query JSONL (_id, text) [required]");
    c_lists->add_option("--qrels", o.qrels, "TREC qrels [required]");
    c_lists->add_option("--k", o.k, "candidate pool depth")->check(CLI::PositiveNumber);
    c_lists->add_option("--m", o.m, "list size (1 gold + m-1 negatives)")
        ->check(CLI::PositiveNumber);
    c_lists->add_option("--seed", o.seed, "sampling seed");
    c_lists->add_option("--out", o.out, "output JSONL path [required]");

    for (auto* cmd : app.get_subcommands({}))
        cmd->add_option("--config", o.config, "key=value config file (flags override)");

    // sweep defaults to the bare sparse environment; everything else to hybrid.
    c_sweep->get_option("--env")->default_str("bm25");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* active = app.get_subcommands().front();
    try {
        if (!o.config.empty()) apply_config(active, o.config);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hare: error: %s\n", e.what());
        return 1;
    }

    const std::map<const CLI::App*, std::vector<const char*>> required = {
        {c_index, {"--corpus", "--index-dir"}},
        {c_search, {"--index-dir", "query"}},
        {c_session, {"--index-dir", "--queries", "--out"}},
        {c_rocchio, {"--index-dir", "--queries", "--qrels", "--out"}},
        {c_eval, {"--run", "--qrels"}},
        {c_sweep, {"--index-dir", "--queries", "--qrels", "--out"}},
        {c_analyze, {"--traces", "--qrels"}},
        {c_lists, {"--index-dir", "--queries", "--qrels", "--out"}},
    };
    for (const char* name : required.at(active)) {
        auto* op = active->get_option_no_throw(name);
        if (op && op->empty()) {
            std::fprintf(stderr, "%s is required\nRun with --help for more information.\n", name);
            return 2;
        }
    }

    try {
        if (c_sweep->parsed() && c_sweep->get_option("--env")->empty()) o.env = "bm25";
        if (c_index->parsed()) return run_index(o);
        if (c_search->parsed()) return run_search(o);
        if (c_session->parsed()) return run_session_cmd(o);
        if (c_rocchio->parsed()) return run_rocchio(o);
        if (c_eval->parsed()) return run_eval(o);
        if (c_sweep->parsed()) return run_sweep(o);
        if (c_analyze->parsed()) return run_analyze(o);
        if (c_lists->parsed()) return run_lists(o);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hare: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
