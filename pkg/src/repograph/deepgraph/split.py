"""Edge splitting for link prediction: held-out positives + verified negatives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GraphTooSmall
from ..kgraph.model import KnowledgeGraph
from .arrays import GraphArrays, allowed_type_pairs, from_graph

MIN_EDGES = 10

IdPair = tuple[str, str]


@dataclass
class EdgeSplit:
    train_pos: list[IdPair]
    val_pos: list[IdPair]
    test_pos: list[IdPair]
    train_neg: list[IdPair]
    val_neg: list[IdPair]
    test_neg: list[IdPair]
    seed: int
    ratios: tuple[float, float, float] = (0.85, 0.05, 0.10)
    neg_ratio: float = 1.0
    extra: dict = field(default_factory=dict)

    def positives(self) -> set[IdPair]:
        return set(self.train_pos) | set(self.val_pos) | set(self.test_pos)


def split_edges(graph: KnowledgeGraph,
                ratios: tuple[float, float, float] = (0.85, 0.05, 0.10),
                neg_ratio: float = 1.0, seed: int = 0,
                arrays: GraphArrays | None = None) -> EdgeSplit:
    """Partition the undirected edge set and sample matched non-edges.

    Negatives are uniform over verified non-edges whose endpoint types are
    connectable under the edge schema; the three negative pools are
    mutually disjoint, so no leakage across splits.
    """
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1, got {ratios}")
    arr = arrays if arrays is not None else from_graph(graph)
    edges = arr.und_edges
    n_edges = len(edges)
    if n_edges < MIN_EDGES:
        raise GraphTooSmall(f"{n_edges} undirected edges < {MIN_EDGES}")

    rng = np.random.default_rng(seed)
    order = rng.permutation(n_edges)
    n_val = int(round(ratios[1] * n_edges))
    n_test = int(round(ratios[2] * n_edges))
    n_train = n_edges - n_val - n_test
    train_idx = order[:n_train]
    val_idx = order[n_train:n_train + n_val]
    test_idx = order[n_train + n_val:]

    edge_set = {tuple(e) for e in edges.tolist()}
    compatible = allowed_type_pairs()
    types = arr.node_types

    def sample_negatives(count: int, taken: set) -> list[tuple[int, int]]:
        out = []
        attempts = 0
        limit = max(10000, count * 200)
        while len(out) < count and attempts < limit:
            attempts += 1
            u = int(rng.integers(0, arr.n))
            v = int(rng.integers(0, arr.n))
            if u == v:
                continue
            key = (min(u, v), max(u, v))
            if key in edge_set or key in taken:
                continue
            tpair = (min(types[u], types[v]), max(types[u], types[v]))
            if tpair not in compatible:
                continue
            taken.add(key)
            out.append(key)
        return out

    taken: set = set()
    neg_train = sample_negatives(int(round(neg_ratio * n_train)), taken)
    neg_val = sample_negatives(int(round(neg_ratio * n_val)), taken)
    neg_test = sample_negatives(int(round(neg_ratio * n_test)), taken)

    def ids(pairs) -> list[IdPair]:
        return [(arr.node_ids[u], arr.node_ids[v]) for u, v in pairs]

    return EdgeSplit(
        train_pos=ids(edges[train_idx].tolist()),
        val_pos=ids(edges[val_idx].tolist()),
        test_pos=ids(edges[test_idx].tolist()),
        train_neg=ids(neg_train),
        val_neg=ids(neg_val),
        test_neg=ids(neg_test),
        seed=seed, ratios=ratios, neg_ratio=neg_ratio,
    )
