"""Deterministic multi-hop traversal over typed edge patterns."""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPattern, NoSeedFound
from ..kgraph.model import EDGE_SCHEMA, EdgeType, KnowledgeGraph, NodeType

Direction = str  # "forward" | "reverse"


@dataclass(frozen=True)
class PathStep:
    edge_type: EdgeType
    direction: Direction = "forward"


@dataclass
class PathPattern:
    """Typed hop chain: start filter, ordered steps, optional end type."""

    steps: list[PathStep]
    start: str | NodeType          # node id or node type
    end_type: NodeType | None = None

    @property
    def hops(self) -> int:
        return len(self.steps)


def _step_types(step: PathStep) -> tuple[frozenset, frozenset]:
    src_ok, dst_ok = EDGE_SCHEMA[step.edge_type]
    return (src_ok, dst_ok) if step.direction == "forward" else (dst_ok, src_ok)


def validate_pattern(pattern: PathPattern, graph: KnowledgeGraph) -> None:
    """Reject chains whose endpoint types can never connect."""
    if not pattern.steps:
        raise InvalidPattern("pattern must have at least one step")
    for step in pattern.steps:
        if step.direction not in ("forward", "reverse"):
            raise InvalidPattern(f"bad direction {step.direction!r}")
    if isinstance(pattern.start, NodeType):
        current = frozenset({pattern.start})
    else:
        node = graph.nodes.get(pattern.start)
        if node is None:
            raise InvalidPattern(f"unknown start node {pattern.start!r}")
        current = frozenset({node.node_type})
    for i, step in enumerate(pattern.steps):
        from_ok, to_ok = _step_types(step)
        if not current & from_ok:
            raise InvalidPattern(
                f"step {i} ({step.edge_type.value} {step.direction}) cannot "
                f"leave node types {sorted(t.value for t in current)}")
        current = to_ok
    if pattern.end_type is not None and pattern.end_type not in current:
        raise InvalidPattern(
            f"end type {pattern.end_type.value} unreachable; chain ends in "
            f"{sorted(t.value for t in current)}")


def traverse_path(graph: KnowledgeGraph,
                  pattern: PathPattern) -> list[tuple[str, list[str]]]:
    """Exact set of end nodes reachable via the pattern, with one witness each.

    Results are sorted by node id; the witness is the lexicographically
    first path (by intermediate node ids), making output deterministic.
    """
    validate_pattern(pattern, graph)

    if isinstance(pattern.start, NodeType):
        frontier = {nid: [nid] for nid in sorted(graph.nodes)
                    if graph.nodes[nid].node_type == pattern.start}
    else:
        frontier = {pattern.start: [pattern.start]}

    for step in pattern.steps:
        nxt: dict[str, list[str]] = {}
        for nid in sorted(frontier):
            path = frontier[nid]
            if step.direction == "forward":
                hops = graph.out_neighbors(nid, step.edge_type)
            else:
                hops = graph.in_neighbors(nid, step.edge_type)
            for _, other in hops:
                if other not in nxt:
                    nxt[other] = path + [other]
        frontier = nxt

    out = []
    for nid in sorted(frontier):
        if pattern.end_type is None or graph.nodes[nid].node_type == pattern.end_type:
            out.append((nid, frontier[nid]))
    return out


# canonical query families the deterministic backend understands
_PR_FUNCTIONS = re.compile(
    r"functions?\b.*\b(?:changed|modified|touched)\b.*\b(?:pr|pull request)\s*#?(\d+)",
    re.IGNORECASE | re.DOTALL)
_COMMIT_AUTHOR = re.compile(
    r"who\s+authored\s+commit\s+([0-9a-f]{6,40})", re.IGNORECASE)
_COMMIT_FILES = re.compile(
    r"files?\b.*\b(?:changed|modified)\b.*\bcommit\s+([0-9a-f]{6,40})",
    re.IGNORECASE | re.DOTALL)
_PR_COMMITS = re.compile(
    r"commits?\b.*\b(?:included|includes|in)\b.*\b(?:pr|pull request)\s*#?(\d+)",
    re.IGNORECASE | re.DOTALL)


def _resolve_commit(graph: KnowledgeGraph, prefix: str) -> str | None:
    matches = sorted(nid for nid in graph.nodes
                     if nid.startswith(f"commit:{prefix.lower()}"))
    return matches[0] if matches else None


def compile_query(graph: KnowledgeGraph, query: str) -> PathPattern | None:
    """Compile a recognized natural-language query to a typed path pattern."""
    m = _PR_FUNCTIONS.search(query)
    if m:
        pr_id = f"pr:#{m.group(1)}"
        if pr_id in graph.nodes:
            return PathPattern(
                steps=[PathStep(EdgeType.INCLUDES), PathStep(EdgeType.MODIFIES),
                       PathStep(EdgeType.CONTAINS)],
                start=pr_id, end_type=NodeType.FUNCTION)
    m = _COMMIT_AUTHOR.search(query)
    if m:
        cid = _resolve_commit(graph, m.group(1))
        if cid:
            return PathPattern(steps=[PathStep(EdgeType.AUTHORED_BY)],
                               start=cid, end_type=NodeType.AUTHOR)
    m = _COMMIT_FILES.search(query)
    if m:
        cid = _resolve_commit(graph, m.group(1))
        if cid:
            return PathPattern(steps=[PathStep(EdgeType.MODIFIES)],
                               start=cid, end_type=NodeType.FILE)
    m = _PR_COMMITS.search(query)
    if m:
        pr_id = f"pr:#{m.group(1)}"
        if pr_id in graph.nodes:
            return PathPattern(steps=[PathStep(EdgeType.INCLUDES)],
                               start=pr_id, end_type=NodeType.COMMIT)
    return None


def text_similarity_seeds(features, query_vec: np.ndarray, k: int = 5,
                          min_cosine: float = 0.05) -> list[tuple[int, float]]:
    """Top-k node rows by text-slice cosine; NoSeedFound below the floor."""
    from ..featurize.features import TEXT_SLICE

    block = features.matrix.a[:, TEXT_SLICE[0]:TEXT_SLICE[1]]
    norms = np.linalg.norm(block, axis=1)
    qn = np.linalg.norm(query_vec)
    if qn == 0:
        raise NoSeedFound("query text encodes to the zero vector")
    sims = np.zeros(len(block))
    nz = norms > 0
    sims[nz] = (block[nz] @ query_vec) / (norms[nz] * qn)
    order = np.lexsort((np.asarray(features.node_ids, dtype=object), -sims))
    best = [(int(i), float(sims[i])) for i in order[:k] if sims[i] >= min_cosine]
    if not best:
        raise NoSeedFound(f"no node above cosine {min_cosine}")
    return best
