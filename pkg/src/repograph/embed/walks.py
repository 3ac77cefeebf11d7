"""Uniform random-walk corpus generation (DeepWalk-style)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import EmptyInput
from ..kgraph.model import KnowledgeGraph
from ..deepgraph.arrays import from_graph


@dataclass
class WalkConfig:
    walks_per_node: int = 10
    walk_length: int = 40
    window: int = 5
    embedding_dim: int = 128
    negatives_per_positive: int = 5
    epochs: int = 3
    lr: float = 0.025
    lr_min: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        for name in ("walks_per_node", "walk_length", "window",
                     "embedding_dim", "negatives_per_positive", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.window >= self.walk_length:
            raise ValueError("window must be smaller than walk_length")


@dataclass
class WalkCorpus:
    node_ids: list[str]
    walks: np.ndarray          # (S, walk_length), -1 padding after dead ends
    config: WalkConfig = field(repr=False, default=None)

    def token_counts(self) -> np.ndarray:
        flat = self.walks[self.walks >= 0]
        return np.bincount(flat, minlength=len(self.node_ids)).astype(np.float64)


def random_walks(graph: KnowledgeGraph, config: WalkConfig | None = None) -> WalkCorpus:
    """walks_per_node uniform walks from every node over the undirected view.

    Node order is shuffled per pass; isolated nodes produce length-1 walks.
    Deterministic under config.seed.
    """
    cfg = config or WalkConfig()
    arr = from_graph(graph)
    if arr.n == 0:
        raise EmptyInput("graph has no nodes")
    rng = np.random.default_rng(cfg.seed)
    starts = np.concatenate([rng.permutation(arr.n)
                             for _ in range(cfg.walks_per_node)]).astype(np.int64)
    walks = _kernels.random_walks(arr.indices, arr.offsets, starts,
                                  cfg.walk_length, seed=cfg.seed ^ 0x5DEECE66D)
    return WalkCorpus(node_ids=arr.node_ids, walks=walks, config=cfg)
