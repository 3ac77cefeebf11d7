"""HTTP API over the engines, router, and episodic memory."""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..config import AppConfig
from ..errors import BackendUnavailable, EmptyQuery
from ..kblam.dataset import expand_window
from ..kgraph import stats
from ..router import (Backend, LlmClientConfig, QueryType, RoutingDecision,
                      dispatch, route)
from .engines import EngineRegistry, Engines, load_engines
from .memory import EpisodicStore, FeedbackConflict, UnknownRecord

MAX_HOPS = 5


class QueryBody(BaseModel):
    query: str
    backend_override: str | None = None
    k: int = 10


class FeedbackBody(BaseModel):
    record_id: int
    rating: str
    comment: str | None = None


class IngestBody(BaseModel):
    repo_path: str
    pr_source: str | None = None
    repo_id: str | None = None


def create_app(config: AppConfig, registry: EngineRegistry | None = None,
               store: EpisodicStore | None = None) -> FastAPI:
    """App factory; artifacts load eagerly so readiness implies loaded."""
    if registry is None:
        registry = EngineRegistry(load_engines(config.engines))
    if store is None:
        store = EpisodicStore(config.server.memory_path)

    app = FastAPI(title="repograph", version="0.1.0")
    app.state.registry = registry
    app.state.memory = store
    jobs: dict[str, dict] = {}
    jobs_lock = threading.Lock()

    llm_cfg = LlmClientConfig(endpoint=config.router_endpoint,
                              model=config.router_model,
                              timeout_s=config.router_timeout_s)

    @app.get("/health")
    def health():
        engines = registry.current
        return {"status": "ok", "graph_version": engines.graph.version,
                "nodes": len(engines.graph.nodes)}

    @app.get("/graph/stats")
    def graph_stats():
        return stats(registry.current.graph)

    @app.get("/node/{node_id:path}")
    def get_node(node_id: str):
        graph = registry.current.graph
        node = graph.nodes.get(node_id)
        if node is None:
            raise HTTPException(404, f"unknown node {node_id!r}")
        return {"id": node.id, "type": node.node_type.value,
                "label": node.label, "attrs": node.attrs,
                "graph_version": graph.version}

    @app.get("/subgraph")
    def get_subgraph(center: str, hops: int = 1, limit: int = 200):
        if not 0 <= hops <= MAX_HOPS:
            raise HTTPException(422, f"hops must be in [0, {MAX_HOPS}]")
        graph = registry.current.graph
        if center not in graph.nodes:
            raise HTTPException(404, f"unknown center {center!r}")
        order = expand_window(graph, center, hops)
        keep = order[:max(limit, 1)]
        kept = set(keep)
        nodes = [{"id": nid, "type": graph.nodes[nid].node_type.value,
                  "label": graph.nodes[nid].label,
                  "attrs": graph.nodes[nid].attrs} for nid in sorted(kept)]
        edges = [{"src": e.src, "dst": e.dst, "type": e.edge_type.value,
                  "attrs": e.attrs}
                 for e in graph.edges if e.src in kept and e.dst in kept]
        return {"center": center, "hops": hops, "truncated": len(order) > len(keep),
                "nodes": nodes, "edges": edges}

    @app.post("/query")
    def post_query(body: QueryBody):
        if not body.query.strip():
            raise HTTPException(400, "query must be non-empty")
        engines = registry.current
        if body.backend_override:
            try:
                backend = Backend(body.backend_override) if \
                    body.backend_override in [b.value for b in Backend] else \
                    {"kblam": Backend.KBLAM, "deepgraph": Backend.DEEPGRAPH,
                     "embedding": Backend.EMBEDDING}[body.backend_override.lower()]
            except KeyError:
                raise HTTPException(422,
                                    f"unknown backend {body.backend_override!r}")
            qtype = {Backend.KBLAM: QueryType.COMPLEX,
                     Backend.DEEPGRAPH: QueryType.SINGLE_HOP,
                     Backend.EMBEDDING: QueryType.SEMANTIC}[backend]
            decision = RoutingDecision(query_type=qtype, backend=backend,
                                       reason="caller override",
                                       source="override")
        else:
            try:
                decision = route(body.query, llm_cfg)
            except EmptyQuery:
                raise HTTPException(400, "query must be non-empty")
        try:
            answer = dispatch(decision, body.query, engines)
        except BackendUnavailable as exc:
            raise HTTPException(503, str(exc))
        answer.ranked = answer.ranked[:body.k]
        rec = store.append_answer(
            query=body.query, decision=decision.as_dict(),
            answer={"ranked": [[nid, float(s)] for nid, s in answer.ranked]},
            latency_ms=answer.latency_ms)
        answer.record_id = rec.record_id
        return answer.as_dict()

    @app.post("/feedback")
    def post_feedback(body: FeedbackBody):
        try:
            rec = store.add_feedback(body.record_id, body.rating, body.comment)
        except UnknownRecord:
            raise HTTPException(404, f"unknown record {body.record_id}")
        except FeedbackConflict:
            raise HTTPException(409, "different feedback already recorded")
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        return rec.as_dict()

    @app.get("/memory")
    def get_memory(since: float | None = None, backend: str | None = None):
        return [rec.as_dict() for rec in store.list(since=since, backend=backend)]

    @app.post("/ingest")
    def post_ingest(body: IngestBody):
        job_id = uuid.uuid4().hex[:12]
        with jobs_lock:
            jobs[job_id] = {"id": job_id, "state": "queued"}

        def run():
            from ..ingest import IngestConfig, snapshot
            from ..kgraph import apply_delta, build_graph
            from ..featurize import featurize_nodes

            with jobs_lock:
                jobs[job_id]["state"] = "running"
            try:
                engines = registry.current
                cfg = IngestConfig(extensions=config.ingest_extensions,
                                   repo_id=body.repo_id,
                                   api_token_env=config.ingest_api_token_env)
                snap = snapshot(body.repo_path, body.pr_source, cfg)
                if engines.graph.provenance[0] == snap.repo_id and \
                        len(engines.graph.nodes):
                    new_graph, report = apply_delta(engines.graph, snap)
                    delta = report.counts
                else:
                    new_graph = build_graph(snap)
                    delta = None
                features = featurize_nodes(new_graph, engines.encoder)
                registry.swap(Engines(
                    graph=new_graph, features=features,
                    encoder=engines.encoder, sage_model=engines.sage_model,
                    kblam_model=engines.kblam_model,
                    embed_index=engines.embed_index))
                with jobs_lock:
                    jobs[job_id].update(state="done",
                                        graph_version=new_graph.version,
                                        nodes=len(new_graph.nodes),
                                        delta=delta)
            except Exception as exc:  # noqa: BLE001 - job surface reports it
                with jobs_lock:
                    jobs[job_id].update(state="failed", error=str(exc))

        threading.Thread(target=run, daemon=True).start()
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        with jobs_lock:
            job = jobs.get(job_id)
            if job is None:
                raise HTTPException(404, f"unknown job {job_id!r}")
            return dict(job)

    ui_dist = config.server.ui_dist
    if ui_dist and Path(ui_dist).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dist, html=True), name="ui")

    return app


def serve(config: AppConfig) -> None:
    """Run the API with uvicorn (blocking)."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.server.host, port=config.server.port,
                log_level="info")
