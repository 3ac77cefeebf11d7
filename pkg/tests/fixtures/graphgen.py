"""Seeded random typed-graph generator used by round-trip and traversal tests."""

from __future__ import annotations

import numpy as np

from repograph.kgraph import EDGE_SCHEMA, Edge, EdgeType, KnowledgeGraph, Node, NodeType

_SPICY_STRINGS = [
    "plain", 'with "quotes"', "unicode: héllo – ◆ ユニコード", "<tag>&amp;</tag>",
    "line\nbreak", "tab\tchar", "emoji 🎈", "back\\slash",
]


def make_random_graph(seed: int, max_nodes: int = 200) -> KnowledgeGraph:
    """Random schema-valid graph with adversarial attribute strings."""
    rng = np.random.default_rng(seed)
    n_nodes = int(rng.integers(2, max_nodes + 1))
    types = list(NodeType)
    g = KnowledgeGraph(repo_id=f"rand-{seed}", head_sha="0" * 40)

    by_type: dict[NodeType, list[str]] = {t: [] for t in types}
    for i in range(n_nodes):
        t = types[int(rng.integers(0, len(types)))]
        nid = f"{t.value.lower()}:n{i}"
        attrs = {
            "text": _SPICY_STRINGS[int(rng.integers(0, len(_SPICY_STRINGS)))],
            "num": int(rng.integers(-1000, 1000)),
            "ratio": float(np.round(rng.random(), 6)),
            "flag": bool(rng.integers(0, 2)),
        }
        g.add_node(Node(nid, t, f"label {i}", attrs))
        by_type[t].append(nid)

    edge_types = list(EdgeType)
    n_edges = int(rng.integers(0, max(1, 3 * n_nodes)))
    made = set()
    for _ in range(n_edges):
        et = edge_types[int(rng.integers(0, len(edge_types)))]
        src_ok, dst_ok = EDGE_SCHEMA[et]
        srcs = [nid for t in src_ok for nid in by_type[t]]
        dsts = [nid for t in dst_ok for nid in by_type[t]]
        if not srcs or not dsts:
            continue
        src = srcs[int(rng.integers(0, len(srcs)))]
        dst = dsts[int(rng.integers(0, len(dsts)))]
        if (src, dst, et) in made:
            continue
        made.add((src, dst, et))
        g.add_edge(Edge(src, dst, et, {"w": float(np.round(rng.random(), 4))}))
    g.finalize()
    return g


def make_two_clique_graph(clique_size: int = 20, seed: int = 0) -> KnowledgeGraph:
    """Two CALLS-cliques of Function nodes with no cross edges."""
    g = KnowledgeGraph(repo_id=f"cliques-{seed}", head_sha="0" * 40)
    names = []
    for c in range(2):
        for i in range(clique_size):
            nid = f"function:clique{c}/f{i:02d}"
            names.append(nid)
            g.add_node(Node(nid, NodeType.FUNCTION, f"f{c}_{i}",
                            {"complexity": 1, "external": False}))
    for c in range(2):
        base = c * clique_size
        for i in range(clique_size):
            for j in range(i + 1, clique_size):
                g.add_edge(Edge(names[base + i], names[base + j], EdgeType.CALLS))
    g.finalize()
    return g


def make_erdos_function_graph(n: int = 40, p: float = 0.15,
                              seed: int = 0) -> KnowledgeGraph:
    """Uniform random CALLS graph over Function nodes."""
    rng = np.random.default_rng(seed)
    g = KnowledgeGraph(repo_id=f"erdos-{seed}", head_sha="0" * 40)
    ids = [f"function:rnd/f{i:03d}" for i in range(n)]
    for i, nid in enumerate(ids):
        g.add_node(Node(nid, NodeType.FUNCTION, f"f{i}", {"external": False}))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.add_edge(Edge(ids[i], ids[j], EdgeType.CALLS))
    g.finalize()
    return g


def make_bipartite_matching_graph(pairs: int = 12, seed: int = 0) -> KnowledgeGraph:
    """File_i CONTAINS Function_i, one edge per pair."""
    g = KnowledgeGraph(repo_id=f"match-{seed}", head_sha="0" * 40)
    for i in range(pairs):
        fid = f"file:pair{i:02d}.py"
        fnid = f"function:pair{i:02d}.py::fn"
        g.add_node(Node(fid, NodeType.FILE, f"pair{i}.py", {"path": f"pair{i}.py"}))
        g.add_node(Node(fnid, NodeType.FUNCTION, f"fn{i}", {"external": False}))
        g.add_edge(Edge(fid, fnid, EdgeType.CONTAINS))
    g.finalize()
    return g


def make_two_type_cluster_graph(per_type: int = 12, seed: int = 0) -> KnowledgeGraph:
    """A Function CALLS-clique plus File nodes, a few CONTAINS links."""
    g = KnowledgeGraph(repo_id=f"twotype-{seed}", head_sha="0" * 40)
    fns = [f"function:t/f{i:02d}" for i in range(per_type)]
    files = [f"file:t/file{i:02d}.py" for i in range(per_type)]
    for i, nid in enumerate(fns):
        g.add_node(Node(nid, NodeType.FUNCTION, f"f{i}", {"external": False}))
    for i, nid in enumerate(files):
        g.add_node(Node(nid, NodeType.FILE, f"file{i}.py", {"path": f"file{i}.py"}))
    for i in range(per_type):
        for j in range(i + 1, per_type):
            g.add_edge(Edge(fns[i], fns[j], EdgeType.CALLS))
    for i in range(0, per_type, 4):
        g.add_edge(Edge(files[i], fns[i], EdgeType.CONTAINS))
    g.finalize()
    return g


def synthetic_features(graph: KnowledgeGraph, dim: int = 32, seed: int = 0,
                       type_shift: float = 0.0):
    """Random unit-norm features aligned to the graph's canonical order.

    ``type_shift`` adds a per-node-type offset direction so types are
    linearly separable when needed.
    """
    from repograph.featurize.features import NodeFeatureMatrix
    from repograph.numkernel import Matrix

    rng = np.random.default_rng(seed)
    ids = list(graph.nodes)
    mat = rng.standard_normal((len(ids), dim))
    if type_shift:
        types = sorted({graph.nodes[n].node_type for n in ids}, key=lambda t: t.value)
        offsets = {t: rng.standard_normal(dim) * type_shift for t in types}
        for i, nid in enumerate(ids):
            mat[i] += offsets[graph.nodes[nid].node_type]
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    mat = mat / np.maximum(norms, 1e-12)
    return NodeFeatureMatrix(node_ids=ids, matrix=Matrix(mat))
