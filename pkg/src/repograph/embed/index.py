"""Similarity index: textual and structural embedding blocks per node."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyIndex, UnknownNode
from ..featurize.encoder import encode_text
from ..featurize.features import TEXT_SLICE

INDEX_META = "index.json"
INDEX_VECS = "index.vec"


@dataclass
class EmbeddingIndex:
    node_ids: list[str]
    textual: np.ndarray      # (N, 768) L2-normalized or zero rows
    structural: np.ndarray   # (N, d)   L2-normalized or zero rows
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self._pos = {nid: i for i, nid in enumerate(self.node_ids)}
        self.text_norms = np.linalg.norm(self.textual, axis=1)
        self.struct_norms = np.linalg.norm(self.structural, axis=1)

    @property
    def n(self) -> int:
        return len(self.node_ids)

    # -- persistence ------------------------------------------------------

    def save(self, directory) -> None:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        meta = {
            "node_ids": self.node_ids,
            "textual_dim": int(self.textual.shape[1]),
            "structural_dim": int(self.structural.shape[1]),
            "metadata": self.metadata,
        }
        (d / INDEX_META).write_text(
            json.dumps(meta, sort_keys=True, ensure_ascii=False, indent=0) + "\n",
            encoding="utf-8")
        with open(d / INDEX_VECS, "wb") as fh:
            fh.write(self.textual.astype("<f8").tobytes())
            fh.write(self.structural.astype("<f8").tobytes())

    @classmethod
    def load(cls, directory) -> "EmbeddingIndex":
        d = Path(directory)
        meta = json.loads((d / INDEX_META).read_text("utf-8"))
        n = len(meta["node_ids"])
        td, sd = meta["textual_dim"], meta["structural_dim"]
        raw = (d / INDEX_VECS).read_bytes()
        textual = np.frombuffer(raw[:n * td * 8], dtype="<f8").reshape(n, td).copy()
        structural = np.frombuffer(raw[n * td * 8:], dtype="<f8").reshape(n, sd).copy()
        return cls(node_ids=meta["node_ids"], textual=textual,
                   structural=structural, metadata=meta["metadata"])


def build_index(graph, features, structural: np.ndarray,
                metadata: dict | None = None) -> EmbeddingIndex:
    """Assemble the index from aligned feature/structural matrices."""
    node_ids = list(features.node_ids)
    if list(graph.nodes) != node_ids or len(node_ids) != len(structural):
        raise ValueError("graph, features and structural rows must align")
    textual = features.matrix.a[:, TEXT_SLICE[0]:TEXT_SLICE[1]].copy()
    norms = np.linalg.norm(structural, axis=1, keepdims=True)
    structural = np.divide(structural, norms, out=np.zeros_like(structural),
                           where=norms > 0)
    return EmbeddingIndex(node_ids=node_ids, textual=textual,
                          structural=structural, metadata=metadata or {})


def query_topk(index: EmbeddingIndex, encoder, query_text: str,
               k: int = 10) -> list[tuple[str, float]]:
    """Exact top-k by cosine against the textual block (exhaustive scan).

    Zero-text nodes are excluded; ties break by node id ascending.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if index.n == 0:
        raise EmptyIndex("index has no nodes")
    q = encode_text(encoder, query_text)
    qn = np.linalg.norm(q)
    eligible = index.text_norms > 0
    if qn == 0 or not eligible.any():
        return []
    sims = np.zeros(index.n)
    sims[eligible] = (index.textual[eligible] @ q) / \
        (index.text_norms[eligible] * qn)
    return _ranked(index, sims, eligible, k, exclude=None)


def expand_structural(index: EmbeddingIndex, node_id: str,
                      k: int = 10) -> list[tuple[str, float]]:
    """Top-k structural neighbors by cosine, excluding the query node."""
    if node_id not in index._pos:
        raise UnknownNode(node_id)
    if k == 0:
        return []
    row = index._pos[node_id]
    base = index.structural[row]
    eligible = index.struct_norms > 0
    sims = np.zeros(index.n)
    if index.struct_norms[row] > 0:
        sims[eligible] = index.structural[eligible] @ base
    return _ranked(index, sims, eligible, k, exclude=row)


def _ranked(index: EmbeddingIndex, sims: np.ndarray, eligible: np.ndarray,
            k: int, exclude: int | None) -> list[tuple[str, float]]:
    ids = np.asarray(index.node_ids, dtype=object)
    mask = eligible.copy()
    if exclude is not None:
        mask[exclude] = False
    cand = np.flatnonzero(mask)
    order = cand[np.lexsort((ids[cand], -sims[cand]))]
    return [(index.node_ids[i], float(sims[i])) for i in order[:k]]
