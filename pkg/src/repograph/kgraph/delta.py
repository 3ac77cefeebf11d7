"""Incremental graph refresh from a newer snapshot."""

from __future__ import annotations

from ..errors import ProvenanceMismatch
from ..ingest.types import RepoSnapshot
from .build import build_graph
from .model import DeltaReport, KnowledgeGraph


def _owning_path(node_id: str) -> str | None:
    """Repo path a file-derived node belongs to, None for shared nodes."""
    kind, _, qualifier = node_id.partition(":")
    if kind == "file":
        return qualifier
    if kind in ("function", "class", "docstring", "returntype", "decorator",
                "controlflow", "tryexcept", "string", "complexity"):
        if qualifier.startswith("external::"):
            return None
        path, sep, _ = qualifier.partition("::")
        return path if sep or kind == "docstring" else None
    return None


def apply_delta(graph: KnowledgeGraph,
                new_snapshot: RepoSnapshot) -> tuple[KnowledgeGraph, DeltaReport]:
    """Rebuild from the new snapshot and report the structural difference.

    File-derived entities change only when their file's parsed content
    changed (node ids are content-derived), so the report's added/removed
    lists stay confined to edited files plus new commits/PRs and any
    component reshaping. The result is structurally equal to a fresh
    build_graph of the new snapshot, with the version advanced.
    """
    if graph.provenance[0] != new_snapshot.repo_id:
        raise ProvenanceMismatch(
            f"graph is for '{graph.provenance[0]}', snapshot for "
            f"'{new_snapshot.repo_id}'")

    new_graph = build_graph(new_snapshot)
    new_graph.version = graph.version + 1

    old_nodes = {nid: n.signature() for nid, n in graph.nodes.items()}
    new_nodes = {nid: n.signature() for nid, n in new_graph.nodes.items()}
    added_nodes = sorted(nid for nid, sig in new_nodes.items()
                         if old_nodes.get(nid) != sig)
    removed_nodes = sorted(nid for nid, sig in old_nodes.items()
                           if new_nodes.get(nid) != sig)

    old_edges = {e.signature() for e in graph.edges}
    new_edges = {e.signature() for e in new_graph.edges}
    added_edges = sorted((s[0], s[1], s[2]) for s in new_edges - old_edges)
    removed_edges = sorted((s[0], s[1], s[2]) for s in old_edges - new_edges)

    changed = set()
    for nid in added_nodes + removed_nodes:
        path = _owning_path(nid)
        if path is not None:
            changed.add(path)

    report = DeltaReport(
        added_nodes=added_nodes,
        removed_nodes=removed_nodes,
        added_edges=added_edges,
        removed_edges=removed_edges,
        changed_files=sorted(changed),
    )
    return new_graph, report
