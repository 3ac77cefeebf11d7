"""Per-node dense feature vectors: 32 numeric dims + 768 text dims = 800."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..kgraph.model import KnowledgeGraph, NodeType
from ..numkernel import Matrix
from .encoder import TEXT_DIM

NUMERIC_DIM = 32
FEATURE_DIM = NUMERIC_DIM + TEXT_DIM  # 800
NUMERIC_SLICE = (0, NUMERIC_DIM)
TEXT_SLICE = (NUMERIC_DIM, FEATURE_DIM)

_TYPE_ORDER = list(NodeType)
_TYPE_INDEX = {t: i for i, t in enumerate(_TYPE_ORDER)}

# numeric layout (type one-hot occupies dims 7..22)
_F_COMPLEXITY, _F_PARAMS, _F_CODELEN, _F_SPAN = 0, 1, 2, 3
_F_DEG, _F_INDEG, _F_OUTDEG = 4, 5, 6
_F_ONEHOT = 7
_F_ASYNC, _F_HASDOC, _F_EXTERNAL, _F_MERGED = 23, 24, 25, 26
_F_ASSIGN, _F_TRY, _F_TIMESTAMP, _F_TEXTLEN = 27, 28, 29, 30


@dataclass
class NodeFeatureMatrix:
    node_ids: list[str]
    matrix: Matrix

    def row_index(self, node_id: str) -> int:
        return self._index[node_id]

    def __post_init__(self):
        self._index = {nid: i for i, nid in enumerate(self.node_ids)}

    @property
    def text_block(self) -> np.ndarray:
        return self.matrix.a[:, TEXT_SLICE[0]:TEXT_SLICE[1]]

    @property
    def numeric_block(self) -> np.ndarray:
        return self.matrix.a[:, :NUMERIC_DIM]

    def save(self, path) -> None:
        header = {"dim": self.matrix.cols, "node_ids": self.node_ids}
        with open(path, "wb") as fh:
            fh.write(b"RGFM1\n")
            fh.write(json.dumps(header, sort_keys=True,
                                ensure_ascii=False).encode("utf-8"))
            fh.write(b"\n")
            fh.write(self.matrix.a.astype("<f8").tobytes())

    @classmethod
    def load(cls, path) -> "NodeFeatureMatrix":
        with open(path, "rb") as fh:
            if fh.read(6) != b"RGFM1\n":
                raise ValueError(f"{path}: not a feature matrix file")
            header = json.loads(fh.readline().decode("utf-8"))
            ids = header["node_ids"]
            dim = header["dim"]
            buf = fh.read(len(ids) * dim * 8)
            mat = np.frombuffer(buf, dtype="<f8").reshape(len(ids), dim).copy()
        return cls(node_ids=ids, matrix=Matrix(mat))


def node_text(node) -> str:
    """Concatenated textual fields used for the text slice."""
    parts = [node.label]
    for key in ("docstring", "module_docstring", "text", "message", "body",
                "title", "value", "target", "return_annotation"):
        v = node.attrs.get(key)
        if isinstance(v, str) and v:
            parts.append(v)
    return " ".join(p for p in parts if p).strip()


def _raw_numeric(graph: KnowledgeGraph, node, text: str) -> np.ndarray:
    a = node.attrs
    row = np.zeros(NUMERIC_DIM)
    if node.node_type == NodeType.COMPLEXITY_METRIC:
        row[_F_COMPLEXITY] = a.get("value") or 0
    else:
        row[_F_COMPLEXITY] = a.get("complexity") or 0
    row[_F_PARAMS] = a.get("param_count") or 0
    row[_F_CODELEN] = a.get("code_length") or 0
    if "start_line" in a and "end_line" in a:
        row[_F_SPAN] = a["end_line"] - a["start_line"] + 1
    else:
        row[_F_SPAN] = a.get("line_count") or 0
    adj = graph.adjacency.get(node.id, {"out": [], "in": []})
    row[_F_OUTDEG] = len(adj["out"])
    row[_F_INDEG] = len(adj["in"])
    row[_F_DEG] = row[_F_INDEG] + row[_F_OUTDEG]
    row[_F_ONEHOT + _TYPE_INDEX[node.node_type]] = 1.0
    row[_F_ASYNC] = 1.0 if a.get("is_async") else 0.0
    row[_F_HASDOC] = 1.0 if (a.get("docstring") or a.get("module_docstring")) else 0.0
    row[_F_EXTERNAL] = 1.0 if a.get("external") else 0.0
    row[_F_MERGED] = 1.0 if a.get("merged") else 0.0
    row[_F_ASSIGN] = a.get("assignments") or 0
    row[_F_TRY] = a.get("try_except_blocks") or 0
    row[_F_TIMESTAMP] = a.get("timestamp") or a.get("created_at") or 0
    row[_F_TEXTLEN] = len(text)
    return row


def featurize_nodes(graph: KnowledgeGraph, encoder) -> NodeFeatureMatrix:
    """N x 800 feature matrix in the graph's canonical node order.

    Numeric dims are min-max normalized per feature over this graph
    (constant columns collapse to 0); text dims carry the encoder output,
    zero for nodes with no text.
    """
    if encoder.dim != TEXT_DIM:
        raise ValueError(f"encoder dim {encoder.dim} != {TEXT_DIM}")
    node_ids = list(graph.nodes)
    n = len(node_ids)
    mat = np.zeros((n, FEATURE_DIM))
    texts = []
    for i, nid in enumerate(node_ids):
        node = graph.nodes[nid]
        text = node_text(node)
        texts.append(text)
        mat[i, :NUMERIC_DIM] = _raw_numeric(graph, node, text)

    if n:
        block = mat[:, :NUMERIC_DIM]
        lo = block.min(axis=0)
        hi = block.max(axis=0)
        span = hi - lo
        safe = np.where(span > 0, span, 1.0)
        mat[:, :NUMERIC_DIM] = np.where(span > 0, (block - lo) / safe, 0.0)

    cache: dict[str, np.ndarray] = {}
    for i, text in enumerate(texts):
        if not text:
            continue
        vec = cache.get(text)
        if vec is None:
            vec = encoder.encode(text)
            cache[text] = vec
        mat[i, NUMERIC_DIM:] = vec

    return NodeFeatureMatrix(node_ids=node_ids, matrix=Matrix(mat))
