"""Typed property-graph model: node/edge taxonomy, graph container, deltas."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class NodeType(str, Enum):
    FILE = "File"
    FUNCTION = "Function"
    CLASS = "Class"
    DOCSTRING = "Docstring"
    RETURN_TYPE = "ReturnType"
    DECORATOR = "Decorator"
    CONTROL_FLOW = "ControlFlow"
    TRY_EXCEPT = "TryExcept"
    IMPORT = "Import"
    STRING_CONSTANT = "StringConstant"
    COMPLEXITY_METRIC = "ComplexityMetric"
    PULL_REQUEST = "PullRequest"
    COMMIT = "Commit"
    USER = "User"
    AUTHOR = "Author"
    COMPONENT = "Component"


class EdgeType(str, Enum):
    CONTAINS = "CONTAINS"
    CALLS = "CALLS"
    HAS_DOCSTRING = "HAS_DOCSTRING"
    RETURNS = "RETURNS"
    DECORATED_BY = "DECORATED_BY"
    HAS_CONTROL_FLOW = "HAS_CONTROL_FLOW"
    HAS_TRY_EXCEPT = "HAS_TRY_EXCEPT"
    IMPORTS = "IMPORTS"
    HAS_STRING = "HAS_STRING"
    HAS_COMPLEXITY = "HAS_COMPLEXITY"
    MODIFIES = "MODIFIES"
    INCLUDES = "INCLUDES"
    AUTHORED_BY = "AUTHORED_BY"
    OPENED_BY = "OPENED_BY"
    MEMBER_OF = "MEMBER_OF"


N = NodeType
# allowed (source types, destination types) per edge type
EDGE_SCHEMA: dict[EdgeType, tuple[frozenset, frozenset]] = {
    EdgeType.CONTAINS: (frozenset({N.FILE, N.CLASS}), frozenset({N.FUNCTION, N.CLASS})),
    EdgeType.CALLS: (frozenset({N.FUNCTION}), frozenset({N.FUNCTION})),
    EdgeType.HAS_DOCSTRING: (frozenset({N.FILE, N.FUNCTION, N.CLASS}),
                             frozenset({N.DOCSTRING})),
    EdgeType.RETURNS: (frozenset({N.FUNCTION}), frozenset({N.RETURN_TYPE})),
    EdgeType.DECORATED_BY: (frozenset({N.FUNCTION, N.CLASS}), frozenset({N.DECORATOR})),
    EdgeType.HAS_CONTROL_FLOW: (frozenset({N.FUNCTION}), frozenset({N.CONTROL_FLOW})),
    EdgeType.HAS_TRY_EXCEPT: (frozenset({N.FUNCTION}), frozenset({N.TRY_EXCEPT})),
    EdgeType.IMPORTS: (frozenset({N.FILE}), frozenset({N.IMPORT})),
    EdgeType.HAS_STRING: (frozenset({N.FILE, N.FUNCTION}), frozenset({N.STRING_CONSTANT})),
    EdgeType.HAS_COMPLEXITY: (frozenset({N.FUNCTION}), frozenset({N.COMPLEXITY_METRIC})),
    EdgeType.MODIFIES: (frozenset({N.COMMIT}), frozenset({N.FILE})),
    EdgeType.INCLUDES: (frozenset({N.PULL_REQUEST}), frozenset({N.COMMIT})),
    EdgeType.AUTHORED_BY: (frozenset({N.COMMIT}), frozenset({N.AUTHOR})),
    EdgeType.OPENED_BY: (frozenset({N.PULL_REQUEST}), frozenset({N.USER})),
    EdgeType.MEMBER_OF: (frozenset({N.FILE, N.CLASS, N.FUNCTION}),
                         frozenset({N.COMPONENT})),
}
del N

Scalar = str | int | float | bool | None


@dataclass
class Node:
    id: str
    node_type: NodeType
    label: str
    attrs: dict[str, Scalar] = field(default_factory=dict)

    def signature(self) -> tuple:
        return (self.id, self.node_type.value, self.label,
                tuple(sorted(self.attrs.items())))


@dataclass
class Edge:
    src: str
    dst: str
    edge_type: EdgeType
    attrs: dict[str, Scalar] = field(default_factory=dict)

    def signature(self) -> tuple:
        return (self.src, self.dst, self.edge_type.value,
                tuple(sorted(self.attrs.items())))


class GraphIntegrityError(Exception):
    pass


class KnowledgeGraph:
    """Immutable-by-convention typed property graph.

    Nodes are id-indexed; edges keep canonical (src, dst, type) order.
    ``adjacency`` maps node id to typed in/out neighbor lists and is always
    consistent with the edge list.
    """

    def __init__(self, repo_id: str = "", head_sha: str = "", version: int = 1):
        self.provenance = (repo_id, head_sha)
        self.version = version
        self.nodes: dict[str, Node] = {}
        self.edges: list[Edge] = []
        self.adjacency: dict[str, dict[str, list[tuple[EdgeType, str]]]] = {}

    # -- construction -----------------------------------------------------

    def add_node(self, node: Node) -> None:
        self.nodes[node.id] = node
        self.adjacency.setdefault(node.id, {"out": [], "in": []})

    def add_edge(self, edge: Edge) -> None:
        if edge.src not in self.nodes or edge.dst not in self.nodes:
            raise GraphIntegrityError(
                f"dangling edge {edge.src} -[{edge.edge_type.value}]-> {edge.dst}")
        src_ok, dst_ok = EDGE_SCHEMA[edge.edge_type]
        if self.nodes[edge.src].node_type not in src_ok or \
                self.nodes[edge.dst].node_type not in dst_ok:
            raise GraphIntegrityError(
                f"edge {edge.edge_type.value} endpoint types "
                f"{self.nodes[edge.src].node_type.value} -> "
                f"{self.nodes[edge.dst].node_type.value} violate the schema")
        self.edges.append(edge)
        self.adjacency[edge.src]["out"].append((edge.edge_type, edge.dst))
        self.adjacency[edge.dst]["in"].append((edge.edge_type, edge.src))

    def finalize(self) -> None:
        """Sort into canonical order (nodes by id, edges by (src, dst, type))."""
        self.nodes = dict(sorted(self.nodes.items()))
        self.edges.sort(key=lambda e: (e.src, e.dst, e.edge_type.value))
        self.adjacency = {nid: {"out": [], "in": []} for nid in self.nodes}
        for e in self.edges:
            self.adjacency[e.src]["out"].append((e.edge_type, e.dst))
            self.adjacency[e.dst]["in"].append((e.edge_type, e.src))

    # -- queries ----------------------------------------------------------

    def out_neighbors(self, node_id: str, edge_type: EdgeType | None = None):
        for etype, dst in self.adjacency[node_id]["out"]:
            if edge_type is None or etype == edge_type:
                yield etype, dst

    def in_neighbors(self, node_id: str, edge_type: EdgeType | None = None):
        for etype, src in self.adjacency[node_id]["in"]:
            if edge_type is None or etype == edge_type:
                yield etype, src

    def undirected_neighbors(self, node_id: str) -> list[str]:
        seen = []
        met = set()
        for _, other in self.adjacency[node_id]["out"]:
            if other not in met:
                met.add(other)
                seen.append(other)
        for _, other in self.adjacency[node_id]["in"]:
            if other not in met:
                met.add(other)
                seen.append(other)
        return seen

    def validate(self) -> None:
        """Referential-integrity check over every edge and adjacency entry."""
        for e in self.edges:
            if e.src not in self.nodes or e.dst not in self.nodes:
                raise GraphIntegrityError(f"dangling edge {e.src} -> {e.dst}")
        degree = sum(len(v["out"]) for v in self.adjacency.values())
        if degree != len(self.edges):
            raise GraphIntegrityError("adjacency inconsistent with edge list")

    def structurally_equal(self, other: "KnowledgeGraph") -> bool:
        if set(self.nodes) != set(other.nodes):
            return False
        for nid, node in self.nodes.items():
            if node.signature() != other.nodes[nid].signature():
                return False
        return sorted(e.signature() for e in self.edges) == \
            sorted(e.signature() for e in other.edges)


@dataclass
class DeltaReport:
    added_nodes: list[str] = field(default_factory=list)
    removed_nodes: list[str] = field(default_factory=list)
    added_edges: list[tuple[str, str, str]] = field(default_factory=list)
    removed_edges: list[tuple[str, str, str]] = field(default_factory=list)
    changed_files: list[str] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        return {
            "added_nodes": len(self.added_nodes),
            "removed_nodes": len(self.removed_nodes),
            "added_edges": len(self.added_edges),
            "removed_edges": len(self.removed_edges),
        }

    def is_empty(self) -> bool:
        return not (self.added_nodes or self.removed_nodes
                    or self.added_edges or self.removed_edges)


def stats(graph: KnowledgeGraph) -> dict:
    """Node/edge counts by type; sums always equal the totals."""
    nodes = {t.value: 0 for t in NodeType}
    edges = {t.value: 0 for t in EdgeType}
    for node in graph.nodes.values():
        nodes[node.node_type.value] += 1
    for edge in graph.edges:
        edges[edge.edge_type.value] += 1
    return {
        "nodes": nodes,
        "edges": edges,
        "total_nodes": len(graph.nodes),
        "total_edges": len(graph.edges),
        "version": graph.version,
        "provenance": list(graph.provenance),
    }
