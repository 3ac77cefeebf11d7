"""HTTP API, episodic memory durability, and concurrent dispatch."""

import threading

import pytest

pytest.importorskip("httpx")
from fastapi.testclient import TestClient

from repograph.config import AppConfig, ServerConfig
from repograph.errors import ArtifactMissing
from repograph.kblam.dataset import expand_window
from repograph.service import EngineRegistry, Engines, EpisodicStore, create_app
from repograph.service.engines import load_engines
from repograph.config import EnginePaths


@pytest.fixture(scope="module")
def engines(fixture_graph):
    from repograph.embed import WalkConfig, build_index, random_walks, train_skipgram
    from repograph.featurize import HashedSubwordEncoder, featurize_nodes

    enc = HashedSubwordEncoder()
    feats = featurize_nodes(fixture_graph, enc)
    cfg = WalkConfig(walks_per_node=3, walk_length=10, embedding_dim=32,
                     epochs=1, seed=0)
    emb, _ = train_skipgram(random_walks(fixture_graph, cfg), cfg)
    index = build_index(fixture_graph, feats, emb)
    return Engines(graph=fixture_graph, features=feats, encoder=enc,
                   embed_index=index)


def _make_app(engines, tmp_path, name="memory.jsonl"):
    cfg = AppConfig(server=ServerConfig(memory_path=str(tmp_path / name)))
    store = EpisodicStore(tmp_path / name)
    app = create_app(cfg, registry=EngineRegistry(engines), store=store)
    return app, store


def test_health_reports_graph_version(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["graph_version"] == engines.graph.version


def test_startup_without_graph_names_the_path(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ArtifactMissing) as err:
        load_engines(EnginePaths(graph=str(missing)))
    assert str(missing) in str(err.value)


def test_graph_stats_endpoint(engines, tmp_path, fixture_repo):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    body = client.get("/graph/stats").json()
    assert body["nodes"] == fixture_repo["manifest"]["nodes_by_type"]


def test_node_detail_and_404(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    body = client.get("/node/function:src/app.py::create_app").json()
    assert body["type"] == "Function"
    assert body["attrs"]["complexity"] == 2
    assert client.get("/node/function:missing").status_code == 404


def test_subgraph_hops_zero_and_bfs_oracle(engines, tmp_path, fixture_graph):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)

    zero = client.get("/subgraph", params={"center": "pr:#1", "hops": 0}).json()
    assert [n["id"] for n in zero["nodes"]] == ["pr:#1"]

    for hops in range(1, 6):
        got = client.get("/subgraph",
                         params={"center": "pr:#1", "hops": hops}).json()
        want = set(expand_window(fixture_graph, "pr:#1", hops))
        assert {n["id"] for n in got["nodes"]} == want, hops
        ids = {n["id"] for n in got["nodes"]}
        for e in got["edges"]:
            assert e["src"] in ids and e["dst"] in ids


def test_subgraph_error_contracts(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    assert client.get("/subgraph",
                      params={"center": "pr:#1", "hops": 6}).status_code == 422
    assert client.get("/subgraph",
                      params={"center": "nope", "hops": 1}).status_code == 404


def test_subgraph_truncation_is_deterministic(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    a = client.get("/subgraph",
                   params={"center": "pr:#1", "hops": 3, "limit": 7}).json()
    b = client.get("/subgraph",
                   params={"center": "pr:#1", "hops": 3, "limit": 7}).json()
    assert a == b
    assert len(a["nodes"]) == 7 and a["truncated"]


def test_query_routes_and_persists(engines, tmp_path, fixture_graph):
    app, store = _make_app(engines, tmp_path)
    client = TestClient(app)
    q = "Who authored commit 13909203?"
    body = client.post("/query", json={"query": q}).json()
    assert body["decision"]["backend"] == "DeepGraph"
    assert body["decision"]["source"] == "fallback"
    assert [nid for nid, _ in body["ranked"]] == ["author:alice@example.com"]
    assert body["record_id"] == 1
    assert len(store) == 1

    again = client.post("/query", json={"query": q}).json()
    assert again["record_id"] == 2  # append-only, distinct ids


def test_query_override_and_errors(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    body = client.post("/query", json={"query": "markdown errors",
                                       "backend_override": "embedding"}).json()
    assert body["decision"]["source"] == "override"
    assert body["decision"]["backend"] == "Embedding"

    assert client.post("/query", json={"query": "  "}).status_code == 400
    # KBLam has no checkpoint loaded in this registry
    multi = "Which functions were changed by commits in pull request #1?"
    assert client.post("/query", json={"query": multi}).status_code == 503


def test_feedback_roundtrip_and_restart_durability(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path, name="durable.jsonl")
    client = TestClient(app)
    rid = client.post("/query", json={"query": "markdown errors",
                                      "backend_override": "embedding"}).json()["record_id"]
    ok = client.post("/feedback", json={"record_id": rid, "rating": "up",
                                        "comment": "helpful"})
    assert ok.status_code == 200
    assert ok.json()["feedback"] == {"rating": "up", "comment": "helpful"}

    assert client.post("/feedback",
                       json={"record_id": 999, "rating": "up"}).status_code == 404
    # same payload is idempotent; a different one conflicts
    assert client.post("/feedback", json={"record_id": rid, "rating": "up",
                                          "comment": "helpful"}).status_code == 200
    assert client.post("/feedback", json={"record_id": rid,
                                          "rating": "down"}).status_code == 409

    # "restart": a fresh store over the same memory file sees everything
    store2 = EpisodicStore(tmp_path / "durable.jsonl")
    rec = store2.get(rid)
    assert rec.feedback == {"rating": "up", "comment": "helpful"}
    assert rec.query == "markdown errors"


def test_memory_listing_and_filter(engines, tmp_path):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    client.post("/query", json={"query": "markdown errors",
                                "backend_override": "embedding"})
    client.post("/query", json={"query": "Who authored commit 13909203?"})
    client.post("/query", json={"query": "template escaping code",
                                "backend_override": "embedding"})
    records = client.get("/memory").json()
    assert [r["record_id"] for r in records] == [1, 2, 3]
    embedding_only = client.get("/memory", params={"backend": "Embedding"}).json()
    assert {r["record_id"] for r in embedding_only} == {1, 3}
    for r in embedding_only:
        assert r["decision"]["backend"] == "Embedding"


def test_concurrent_mixed_backend_queries(engines, tmp_path):
    app, store = _make_app(engines, tmp_path)
    client = TestClient(app)
    queries = ["Who authored commit 13909203?",
               "markdown rendering errors"] * 8
    results = [None] * 16
    expected_author = ["author:alice@example.com"]

    def hit(i):
        override = None if i % 2 == 0 else "embedding"
        payload = {"query": queries[i]}
        if override:
            payload["backend_override"] = override
        resp = client.post("/query", json=payload)
        results[i] = resp

    threads = [threading.Thread(target=hit, args=(i,)) for i in range(16)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    for i, resp in enumerate(results):
        assert resp.status_code == 200, i
        body = resp.json()
        if i % 2 == 0:
            assert [nid for nid, _ in body["ranked"]] == expected_author
    assert len(store) == 16
    ids = [r.record_id for r in store.list()]
    assert len(set(ids)) == 16
    # no torn records: replay from disk agrees
    replayed = EpisodicStore(store.path)
    assert len(replayed) == 16


def test_ingest_job_swaps_graph(engines, tmp_path, fixture_repo):
    app, _ = _make_app(engines, tmp_path)
    client = TestClient(app)
    job = client.post("/ingest", json={
        "repo_path": str(fixture_repo["repo"]),
        "pr_source": str(fixture_repo["prs"]),
        "repo_id": "demo-repo"}).json()
    import time
    for _ in range(100):
        status = client.get(f"/jobs/{job['job_id']}").json()
        if status["state"] in ("done", "failed"):
            break
        time.sleep(0.1)
    assert status["state"] == "done", status
    assert status["delta"] == {"added_nodes": 0, "removed_nodes": 0,
                               "added_edges": 0, "removed_edges": 0}
    assert client.get("/health").json()["graph_version"] == \
        engines.graph.version + 1
    assert client.get("/jobs/doesnotexist").status_code == 404
