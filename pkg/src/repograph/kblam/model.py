"""Window encoding, rectangular attention, and calibrated node scoring.

One query row attends over N window-node embeddings (a 1xN attention
matrix per head, never NxN); the scoring head concatenates the attended
query with each node embedding. All backward passes are analytic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import AllMaskedRow, UnknownCenter
from ..numkernel import MASK_SENTINEL, ParamStore
from ..numkernel.ops import row_softmax_arr
from .dataset import expand_window


@dataclass
class KblamConfig:
    feature_dim: int = 800
    query_dim: int = 768
    model_dim: int = 256
    heads: int = 4
    score_hidden: int = 256
    dropout: float = 0.1
    default_hops: int = 3
    max_hops: int = 5
    epochs: int = 30
    batch_size: int = 8
    lr: float = 1e-3
    seed: int = 0

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.heads


def init_store(cfg: KblamConfig) -> ParamStore:
    rng = np.random.default_rng(cfg.seed)
    store = ParamStore(rng_seed=cfg.seed)
    d, q = cfg.model_dim, cfg.query_dim
    f = cfg.feature_dim
    store.add("Wg", rng.standard_normal((2 * f, d)) / np.sqrt(2 * f))
    store.add("bg", np.zeros((1, d)))
    store.add("Wq", rng.standard_normal((q, d)) / np.sqrt(q))
    store.add("Wk", rng.standard_normal((d, d)) / np.sqrt(d))
    store.add("Wv", rng.standard_normal((d, d)) / np.sqrt(d))
    store.add("Wo", rng.standard_normal((d, d)) / np.sqrt(d))
    store.add("Ws1", rng.standard_normal((2 * d, cfg.score_hidden))
              / np.sqrt(2 * d))
    store.add("bs1", np.zeros((1, cfg.score_hidden)))
    store.add("Ws2", rng.standard_normal((cfg.score_hidden, 1))
              / np.sqrt(cfg.score_hidden))
    store.add("bs2", np.zeros((1, 1)))
    store.extra = {"kind": "kblam", "config": vars(cfg)}
    return store


@dataclass
class Window:
    """Precomputed window structure: node rows + in-window adjacency."""

    node_ids: list[str]
    feature_rows: np.ndarray          # (N, feature_dim)
    indices: np.ndarray               # in-window neighbor CSR
    offsets: np.ndarray
    parents: dict[str, str | None]    # BFS tree for witness paths


def build_window(graph, features, center: str, hops: int) -> Window:
    if center not in graph.nodes:
        raise UnknownCenter(center)
    order = expand_window(graph, center, hops)
    pos = {nid: i for i, nid in enumerate(order)}
    nbrs: list[list[int]] = [[] for _ in order]
    parents: dict[str, str | None] = {center: None}
    for nid in order:
        for nb in sorted(graph.undirected_neighbors(nid)):
            if nb in pos:
                nbrs[pos[nid]].append(pos[nb])
                if nb not in parents and nid in parents:
                    parents[nb] = nid
    offsets = np.zeros(len(order) + 1, dtype=np.int64)
    flat: list[int] = []
    for i, lst in enumerate(nbrs):
        flat.extend(sorted(set(lst)))
        offsets[i + 1] = len(flat)
    rows = np.asarray([features.row_index(nid) for nid in order])
    return Window(node_ids=order,
                  feature_rows=features.matrix.a[rows],
                  indices=np.asarray(flat, dtype=np.int64),
                  offsets=offsets, parents=parents)


def encode_subgraph(store: ParamStore, window: Window):
    """One mean-concat GNN layer over window-internal edges, ReLU output.

    Nodes with no in-window neighbors fall back to their own features for
    the aggregation half. Returns (embeddings, cache).
    """
    x = window.feature_rows
    agg = _kernels.seg_mean_rows(x, window.indices, window.offsets)
    isolated = np.diff(window.offsets) == 0
    if isolated.any():
        agg[isolated] = x[isolated]
    cat = np.concatenate([x, agg], axis=1)
    pre = cat @ store["Wg"] + store["bg"]
    h = np.maximum(pre, 0.0)
    return h, (cat, pre)


def encode_subgraph_backward(store, cache, d_h, grads) -> None:
    cat, pre = cache
    d_pre = d_h * (pre > 0)
    grads["Wg"] = grads.get("Wg", 0) + cat.T @ d_pre
    grads["bg"] = grads.get("bg", 0) + d_pre.sum(axis=0, keepdims=True)


@dataclass
class AttentionTrace:
    per_head: np.ndarray        # (heads, N)
    averaged: np.ndarray        # (N,)
    node_ids: list[str] = field(default_factory=list)

    def top_attended(self, k: int = 5) -> list[tuple[str, float]]:
        order = np.lexsort((np.asarray(self.node_ids, dtype=object),
                            -self.averaged))
        return [(self.node_ids[i], float(self.averaged[i]))
                for i in order[:k] if self.averaged[i] > 0]


def rectangular_attention(store: ParamStore, cfg: KblamConfig,
                          query_vec: np.ndarray, node_embs: np.ndarray,
                          mask: np.ndarray):
    """Multi-head 1xN attention of the query row over window nodes.

    Masked nodes receive exactly zero weight in every head. Returns
    (attended vector, per-head weights, cache for backward).
    """
    if not mask.any():
        raise AllMaskedRow("attention window is empty")
    d_h = cfg.head_dim
    q = query_vec @ store["Wq"]            # (d,)
    k = node_embs @ store["Wk"]            # (N, d)
    v = node_embs @ store["Wv"]            # (N, d)
    n = node_embs.shape[0]
    weights = np.zeros((cfg.heads, n))
    head_outs = np.zeros((cfg.heads, d_h))
    logits = np.zeros((cfg.heads, n))
    scale = 1.0 / np.sqrt(d_h)
    for h in range(cfg.heads):
        sl = slice(h * d_h, (h + 1) * d_h)
        logits[h] = (k[:, sl] @ q[sl]) * scale
        weights[h] = row_softmax_arr(logits[h][None, :], mask[None, :])[0]
        head_outs[h] = weights[h] @ v[:, sl]
    concat = head_outs.reshape(-1)         # (d,)
    attended = concat @ store["Wo"]        # (d,)
    cache = (q, k, v, weights, concat, scale)
    return attended, weights, cache


def rectangular_attention_backward(store, cfg, query_vec, node_embs, mask,
                                   cache, d_attended, grads) -> np.ndarray:
    """Returns d(node_embs); accumulates parameter grads in place."""
    q, k, v, weights, concat, scale = cache
    d_h = cfg.head_dim
    grads["Wo"] = grads.get("Wo", 0) + np.outer(concat, d_attended)
    d_concat = store["Wo"] @ d_attended
    d_q = np.zeros_like(q)
    d_k = np.zeros_like(k)
    d_v = np.zeros_like(v)
    for h in range(cfg.heads):
        sl = slice(h * d_h, (h + 1) * d_h)
        d_out_h = d_concat[sl]
        w = weights[h]
        d_v[:, sl] += np.outer(w, d_out_h)
        d_w = v[:, sl] @ d_out_h
        # softmax backward; masked entries have w == 0 hence stay 0
        d_logit = w * (d_w - float(w @ d_w))
        d_q[sl] += (d_logit @ k[:, sl]) * scale
        d_k[:, sl] += np.outer(d_logit, q[sl]) * scale
    grads["Wq"] = grads.get("Wq", 0) + np.outer(query_vec, d_q)
    grads["Wk"] = grads.get("Wk", 0) + node_embs.T @ d_k
    grads["Wv"] = grads.get("Wv", 0) + node_embs.T @ d_v
    return d_k @ store["Wk"].T + d_v @ store["Wv"].T


def score_nodes(store: ParamStore, cfg: KblamConfig, attended: np.ndarray,
                node_embs: np.ndarray, mask: np.ndarray,
                dropout_mask: np.ndarray | None = None):
    """Per-node scalar scores; masked entries pinned at the sentinel.

    ``dropout_mask`` (pre-scaled inverted-dropout multiplier) is supplied
    during training only; inference runs the head deterministically.
    """
    n = node_embs.shape[0]
    cat = np.concatenate([np.repeat(attended[None, :], n, axis=0), node_embs],
                         axis=1)
    pre = cat @ store["Ws1"] + store["bs1"]
    h = np.maximum(pre, 0.0)
    if dropout_mask is not None:
        h = h * dropout_mask
    scores = (h @ store["Ws2"] + store["bs2"]).ravel()
    scores = np.where(mask, scores, MASK_SENTINEL)
    return scores, (cat, pre, h)


def score_nodes_backward(store, cfg, cache, d_scores, mask, dropout_mask,
                         grads) -> tuple[np.ndarray, np.ndarray]:
    """Returns (d_attended, d_node_embs)."""
    cat, pre, h = cache
    d_scores = np.where(mask, d_scores, 0.0)[:, None]
    grads["Ws2"] = grads.get("Ws2", 0) + h.T @ d_scores
    grads["bs2"] = grads.get("bs2", 0) + d_scores.sum(axis=0, keepdims=True)
    d_h = d_scores @ store["Ws2"].T
    if dropout_mask is not None:
        d_h = d_h * dropout_mask
    d_pre = d_h * (pre > 0)
    grads["Ws1"] = grads.get("Ws1", 0) + cat.T @ d_pre
    grads["bs1"] = grads.get("bs1", 0) + d_pre.sum(axis=0, keepdims=True)
    d_cat = d_pre @ store["Ws1"].T
    d = cfg.model_dim
    d_attended = d_cat[:, :d].sum(axis=0)
    d_nodes = d_cat[:, d:]
    return d_attended, d_nodes


@dataclass
class BatchedSubgraphs:
    """Padded window batch; masked positions never reach attention/scoring."""

    node_ids: list[list[str]]
    embeddings: np.ndarray    # (B, N_max, model_dim)
    mask: np.ndarray          # (B, N_max) boolean

    @classmethod
    def from_windows(cls, encoded: list[tuple[np.ndarray, list[str]]],
                     model_dim: int) -> "BatchedSubgraphs":
        n_max = max(len(ids) for _, ids in encoded)
        b = len(encoded)
        embs = np.zeros((b, n_max, model_dim))
        mask = np.zeros((b, n_max), dtype=bool)
        ids = []
        for i, (h, node_ids) in enumerate(encoded):
            embs[i, :len(node_ids)] = h
            mask[i, :len(node_ids)] = True
            ids.append(list(node_ids))
        return cls(node_ids=ids, embeddings=embs, mask=mask)
