"""Array views of a knowledge graph for the numeric trainers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kgraph.model import EdgeType, KnowledgeGraph


@dataclass
class GraphArrays:
    """Canonical node order + undirected adjacency in CSR form."""

    node_ids: list[str]
    index: dict[str, int]
    indices: np.ndarray     # undirected neighbor lists (no self loops)
    offsets: np.ndarray
    und_edges: np.ndarray   # unique undirected pairs, u < v, shape (E, 2)
    deg: np.ndarray
    node_types: list[str]

    @property
    def n(self) -> int:
        return len(self.node_ids)


def from_graph(graph: KnowledgeGraph) -> GraphArrays:
    node_ids = list(graph.nodes)
    index = {nid: i for i, nid in enumerate(node_ids)}
    nbrs: list[set[int]] = [set() for _ in node_ids]
    pairs = set()
    for e in graph.edges:
        u, v = index[e.src], index[e.dst]
        if u == v:
            continue
        nbrs[u].add(v)
        nbrs[v].add(u)
        pairs.add((min(u, v), max(u, v)))

    offsets = np.zeros(len(node_ids) + 1, dtype=np.int64)
    flat: list[int] = []
    for i, s in enumerate(nbrs):
        ordered = sorted(s)
        flat.extend(ordered)
        offsets[i + 1] = len(flat)
    indices = np.asarray(flat, dtype=np.int64)
    und_edges = np.asarray(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    deg = np.diff(offsets).astype(np.float64)
    return GraphArrays(
        node_ids=node_ids, index=index, indices=indices, offsets=offsets,
        und_edges=und_edges, deg=deg,
        node_types=[graph.nodes[nid].node_type.value for nid in node_ids],
    )


def per_type_undirected(graph: KnowledgeGraph,
                        arrays: GraphArrays) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-edge-type undirected CSR with self loops (every node present)."""
    out = {}
    present = sorted({e.edge_type for e in graph.edges}, key=lambda t: t.value)
    for etype in present:
        nbrs: list[set[int]] = [{i} for i in range(arrays.n)]
        for e in graph.edges:
            if e.edge_type != etype:
                continue
            u, v = arrays.index[e.src], arrays.index[e.dst]
            nbrs[u].add(v)
            nbrs[v].add(u)
        offsets = np.zeros(arrays.n + 1, dtype=np.int64)
        flat: list[int] = []
        for i, s in enumerate(nbrs):
            flat.extend(sorted(s))
            offsets[i + 1] = len(flat)
        out[etype.value] = (np.asarray(flat, dtype=np.int64), offsets)
    return out


def gcn_propagation_edges(arrays: GraphArrays) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Edge arrays (src, dst, coef) of the symmetric-normalized A+I operator."""
    srcs, dsts = [], []
    for v in range(arrays.n):
        lo, hi = arrays.offsets[v], arrays.offsets[v + 1]
        for u in arrays.indices[lo:hi]:
            srcs.append(int(u))
            dsts.append(v)
        srcs.append(v)
        dsts.append(v)
    src = np.asarray(srcs, dtype=np.int64)
    dst = np.asarray(dsts, dtype=np.int64)
    dtil = arrays.deg + 1.0
    coef = 1.0 / np.sqrt(dtil[src] * dtil[dst])
    return src, dst, coef


def allowed_type_pairs() -> set[tuple[str, str]]:
    """Unordered node-type pairs connectable by at least one edge type."""
    from ..kgraph.model import EDGE_SCHEMA

    pairs = set()
    for src_ok, dst_ok in EDGE_SCHEMA.values():
        for s in src_ok:
            for d in dst_ok:
                pairs.add((min(s.value, d.value), max(s.value, d.value)))
    return pairs


_ = EdgeType  # re-exported for typed callers
