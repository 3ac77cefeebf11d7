"""Graph persistence: canonical JSON and GraphML."""

from __future__ import annotations

import json
from pathlib import Path
from xml.etree import ElementTree as ET

from ..errors import MalformedGraphFile
from .model import Edge, EdgeType, KnowledgeGraph, Node, NodeType

GRAPH_SCHEMA_VERSION = 1


def graph_to_dict(graph: KnowledgeGraph) -> dict:
    return {
        "schema_version": GRAPH_SCHEMA_VERSION,
        "provenance": {"repo_id": graph.provenance[0],
                       "head_sha": graph.provenance[1]},
        "version": graph.version,
        "nodes": [
            {"id": n.id, "type": n.node_type.value, "label": n.label,
             "attrs": n.attrs}
            for n in sorted(graph.nodes.values(), key=lambda n: n.id)
        ],
        "edges": [
            {"src": e.src, "dst": e.dst, "type": e.edge_type.value,
             "attrs": e.attrs}
            for e in sorted(graph.edges,
                            key=lambda e: (e.src, e.dst, e.edge_type.value))
        ],
    }


def graph_from_dict(raw: dict, path: str = "<memory>") -> KnowledgeGraph:
    try:
        prov = raw["provenance"]
        g = KnowledgeGraph(prov["repo_id"], prov["head_sha"],
                           version=raw.get("version", 1))
        for n in raw["nodes"]:
            g.add_node(Node(n["id"], NodeType(n["type"]), n["label"],
                            dict(n["attrs"])))
        for e in raw["edges"]:
            g.add_edge(Edge(e["src"], e["dst"], EdgeType(e["type"]),
                            dict(e["attrs"])))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedGraphFile(path, f"bad graph structure: {exc}") from exc
    g.finalize()
    g.validate()
    return g


def export_json(graph: KnowledgeGraph, path) -> None:
    text = json.dumps(graph_to_dict(graph), sort_keys=True, ensure_ascii=False,
                      separators=(",", ":")) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def import_json(path) -> KnowledgeGraph:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise MalformedGraphFile(str(path), f"unreadable: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraphFile(str(path), exc.msg, line=exc.lineno,
                                 offset=exc.colno) from exc
    return graph_from_dict(raw, str(path))


def export_graphml(graph: KnowledgeGraph, path) -> None:
    """GraphML with typed keys; the attr map is packed as one JSON string."""
    root = ET.Element("graphml", xmlns="http://graphml.graphdrawing.org/xmlns")
    for key_id, target, name in (("d_type", "node", "type"),
                                 ("d_label", "node", "label"),
                                 ("d_attrs", "node", "attrs"),
                                 ("e_type", "edge", "type"),
                                 ("e_attrs", "edge", "attrs")):
        ET.SubElement(root, "key", id=key_id, attrib={
            "for": target, "attr.name": name, "attr.type": "string"})
    gml = ET.SubElement(root, "graph", id=graph.provenance[0] or "G",
                        edgedefault="directed")
    for node in sorted(graph.nodes.values(), key=lambda n: n.id):
        el = ET.SubElement(gml, "node", id=node.id)
        ET.SubElement(el, "data", key="d_type").text = node.node_type.value
        ET.SubElement(el, "data", key="d_label").text = node.label
        ET.SubElement(el, "data", key="d_attrs").text = json.dumps(
            node.attrs, sort_keys=True, ensure_ascii=False)
    for edge in sorted(graph.edges, key=lambda e: (e.src, e.dst, e.edge_type.value)):
        el = ET.SubElement(gml, "edge", source=edge.src, target=edge.dst)
        ET.SubElement(el, "data", key="e_type").text = edge.edge_type.value
        ET.SubElement(el, "data", key="e_attrs").text = json.dumps(
            edge.attrs, sort_keys=True, ensure_ascii=False)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)
