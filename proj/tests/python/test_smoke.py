"""End-to-end smoke tests for the Python bindings."""

import math

import pytest

import hare


def test_tokenize():
    assert hare.tokenize("C++ and Java!") == ["c", "and", "java"]


def test_fnv1a64_known_value():
    assert hare.fnv1a64("a") == 0xAF63DC4C8601EC8C


@pytest.fixture
def index():
    return hare.Index.build(
        [
            ("d1", "", "apple banana cherry"),
            ("d2", "", "apple apple date"),
            ("d3", "", "banana banana banana fig"),
            ("d4", "", "grape"),
        ]
    )


def test_index_search(index):
    assert index.doc_count == 4
    hits = index.search("apple")
    assert [h[0] for h in hits] == ["d2", "d1"]
    assert hits[0][1] > hits[1][1]
    # operators: must-not drops, boost reweights
    assert [h[0] for h in index.search("apple -date")] == ["d1"]
    assert index.idf("grape") > index.idf("apple")


def test_index_save_load(index, tmp_path):
    index.save(str(tmp_path))
    again = hare.Index.load(str(tmp_path))
    assert again.search("banana") == index.search("banana")


def test_ndcg():
    assert hare.ndcg_at_k(["gold"], {"gold": 1}) == pytest.approx(1.0)
    # second place behind an unjudged doc
    assert hare.ndcg_at_k(["x", "gold"], {"gold": 1}) == pytest.approx(
        1.0 / math.log2(3)
    )
    assert hare.ndcg_at_k([], {"gold": 1}) == 0.0


def test_listwise_ce_uniform_is_ln_m():
    assert hare.listwise_softmax_ce([1, 0], [3.0, 3.0]) == pytest.approx(
        math.log(2), abs=1e-12
    )


def test_embedder_is_normalized():
    emb = hare.Embedder.feature_hash(16)
    v = emb.embed("apple banana apple")
    assert len(v) == 16
    assert sum(x * x for x in v) == pytest.approx(1.0)
    assert emb.embed("nothing matches" * 0 + "") == [0.0] * 16


def test_render_query_round_trip():
    assert hare.render_query("apple +banana cherry^2") == "apple +banana cherry^2"


def test_hybrid_retrieve_unions_both_retrievers(index):
    env = hare.SearchEnv(index, kind="hybrid", dim=16)
    sparse_ids = {h[0] for h in index.search("apple", k=4)}
    hybrid_ids = [h[0] for h in env.retrieve("apple", k=4)]
    assert sparse_ids.issubset(set(hybrid_ids))
    assert len(hybrid_ids) == len(set(hybrid_ids))


def deep_corpus():
    """Gold buried below ten distractors, reachable through a shared key term."""
    docs = [("gold", "", "qa qb key p1 p2 p3 p4 p5"), ("dis0", "", "qa qb key")]
    docs += [(f"dis{j}", "", f"qa qb fil{j}") for j in range(1, 10)]
    return docs, {"q1": {"gold": 1}}


def test_session_rocchio_surfaces_buried_gold():
    docs, qrels = deep_corpus()
    idx = hare.Index.build(docs)
    env = hare.SearchEnv(idx, kind="bm25")
    result = hare.run_search_session(
        env, "q1", "qa qb", scorer="oracle", expander="rocchio", qrels=qrels
    )
    assert result["ndcg10"][0] == pytest.approx(0.0)
    assert result["ndcg10"][-1] == pytest.approx(1.0)
    assert result["refinements"][0] is None
    assert result["refinements"][1] == "+key"
    assert result["final"][0][0] == "gold"
    assert result["termination"] == "EXPANDER_STOP"
    assert result["dense_calls"] == 0
    assert result["docs_scored"] >= len(result["final"])


def test_session_none_expander_stops_immediately(index):
    env = hare.SearchEnv(index, kind="bm25")
    result = hare.run_search_session(env, "q", "apple", expander="none")
    assert len(result["queries"]) == 1
    assert result["ndcg10"] == [None]
    assert result["termination"] == "EXPANDER_STOP"
