"""LLM-first routing with rule fallback, and backend dispatch."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from ..errors import BackendUnavailable, RouterParseError
from .classify import classify_fallback, parse_response, render_prompt
from .types import Backend, LlmClientConfig, RoutingDecision

log = logging.getLogger(__name__)


def call_llm(prompt: str, config: LlmClientConfig, session=None) -> str:
    """Minimal chat-completion call: {model, messages, temperature:0}."""
    if session is None:
        import requests
        session = requests
    resp = session.post(
        config.endpoint,
        json={"model": config.model,
              "messages": [{"role": "user", "content": prompt}],
              "temperature": 0},
        timeout=config.timeout_s)
    resp.raise_for_status()
    return resp.json()["choices"][0]["message"]["content"]


def route(query: str, config: LlmClientConfig | None = None,
          session=None) -> RoutingDecision:
    """Total routing: LLM path when configured, rule fallback otherwise.

    Any transport or parse failure degrades to the fallback; the decision
    records which path produced it.
    """
    cfg = config or LlmClientConfig()
    if cfg.endpoint:
        try:
            raw = call_llm(render_prompt(query), cfg, session=session)
            return parse_response(raw)
        except RouterParseError as exc:
            log.warning("router LLM output unparsable (%s); falling back", exc)
        except Exception as exc:  # noqa: BLE001 - transport errors degrade
            log.warning("router LLM endpoint failed (%s); falling back", exc)
    return classify_fallback(query)


@dataclass
class RoutedAnswer:
    query: str
    decision: RoutingDecision
    ranked: list[tuple[str, float]]
    trace: dict = field(default_factory=dict)
    subgraph: dict = field(default_factory=dict)
    latency_ms: float = 0.0
    record_id: int | None = None

    def as_dict(self) -> dict:
        return {
            "query": self.query,
            "decision": self.decision.as_dict(),
            "ranked": [[nid, score] for nid, score in self.ranked],
            "trace": self.trace,
            "subgraph": self.subgraph,
            "latency_ms": self.latency_ms,
            "record_id": self.record_id,
        }


def result_subgraph(graph, answer_ids: list[str],
                    witness_paths: dict[str, list[str]] | None = None,
                    context_hops: int = 1, limit: int = 60) -> dict:
    """Concise, referentially closed fragment: answers + witnesses + context."""
    keep: list[str] = []
    seen = set()

    def add(nid: str):
        if nid not in seen and nid in graph.nodes:
            seen.add(nid)
            keep.append(nid)

    for nid in answer_ids:
        add(nid)
    for path in (witness_paths or {}).values():
        for nid in path:
            add(nid)
    for nid in list(keep):
        for nb in graph.undirected_neighbors(nid):
            if len(keep) >= limit:
                break
            add(nb)

    nodes = [{"id": nid, "type": graph.nodes[nid].node_type.value,
              "label": graph.nodes[nid].label,
              "attrs": graph.nodes[nid].attrs} for nid in sorted(keep)]
    edges = [{"src": e.src, "dst": e.dst, "type": e.edge_type.value,
              "attrs": e.attrs}
             for e in graph.edges if e.src in seen and e.dst in seen]
    return {"nodes": nodes, "edges": edges}


def dispatch(decision: RoutingDecision, query: str, engines) -> RoutedAnswer:
    """Execute the decision against the loaded engine artifacts.

    DeepGraph prefers an exact typed traversal when the query compiles to a
    known pattern, else learned single-hop ranking; KBLam answers with the
    attention model; Embedding runs the cosine index.
    """
    from ..deepgraph import answer_single_hop, compile_query, traverse_path
    from ..embed import query_topk
    from ..kblam.train import answer as kblam_answer

    start = time.perf_counter()
    graph = engines.graph
    if decision.backend == Backend.KBLAM:
        if engines.kblam_model is None:
            raise BackendUnavailable("kblam", "no trained checkpoint loaded")
        out = kblam_answer(engines.kblam_model, graph, engines.features,
                           query, encoder=engines.encoder)
        ranked = out["ranked"]
        witness = out["witness_paths"]
        trace = {"kind": "kblam", "attention": out["attention"],
                 "witness_paths": witness,
                 "low_confidence": out["low_confidence"],
                 "window": out["window"]}
    elif decision.backend == Backend.DEEPGRAPH:
        pattern = compile_query(graph, query)
        if pattern is not None:
            results = traverse_path(graph, pattern)
            ranked = [(nid, 1.0) for nid, _ in results]
            witness = {nid: path for nid, path in results}
            trace = {"kind": "traversal",
                     "pattern": [(s.edge_type.value, s.direction)
                                 for s in pattern.steps],
                     "witness_paths": witness}
        else:
            if engines.sage_model is None:
                raise BackendUnavailable("deepgraph",
                                         "no trained link predictor loaded")
            results = answer_single_hop(graph, engines.sage_model, query,
                                        engines.encoder, engines.features)
            ranked = [(r["node_id"], r["score"]) for r in results]
            witness = {r["node_id"]: r["trace"] for r in results}
            trace = {"kind": "single-hop", "witness_paths": witness}
    else:
        if engines.embed_index is None:
            raise BackendUnavailable("embedding", "no index loaded")
        ranked = query_topk(engines.embed_index, engines.encoder, query, k=10)
        witness = {}
        trace = {"kind": "embedding"}

    answer_ids = [nid for nid, _ in ranked[:10]]
    sub = result_subgraph(graph, answer_ids, witness)
    return RoutedAnswer(
        query=query, decision=decision, ranked=list(ranked), trace=trace,
        subgraph=sub, latency_ms=(time.perf_counter() - start) * 1000.0)
