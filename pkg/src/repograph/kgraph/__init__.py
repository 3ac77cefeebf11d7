"""Typed knowledge graph: build, persist, update, export."""

from .build import build_graph
from .delta import apply_delta
from .io import export_graphml, export_json, graph_from_dict, graph_to_dict, import_json
from .model import (EDGE_SCHEMA, DeltaReport, Edge, EdgeType,
                    GraphIntegrityError, KnowledgeGraph, Node, NodeType, stats)

__all__ = [
    "EDGE_SCHEMA", "DeltaReport", "Edge", "EdgeType", "GraphIntegrityError",
    "KnowledgeGraph", "Node", "NodeType",
    "build_graph", "apply_delta", "stats",
    "export_graphml", "export_json", "import_json",
    "graph_from_dict", "graph_to_dict",
]
