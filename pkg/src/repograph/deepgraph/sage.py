"""Supervised link prediction: mean-aggregating SAGE layers + inner-product decoder.

Gradients are analytic (no autodiff); ``numkernel.gradient_check`` validates
them in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import NonFiniteLoss
from ..numkernel import ParamStore, adam_step, bce_loss_arr, sigmoid
from .arrays import GraphArrays, from_graph
from .metrics import LinkPredMetrics, eval_link_prediction
from .split import EdgeSplit


@dataclass
class SageConfig:
    in_dim: int = 800
    hidden: int = 256
    layers: int = 2
    epochs: int = 40
    lr: float = 0.01
    threshold: float = 0.5
    top_k: int = 3
    seed: int = 0


def _init_store(cfg: SageConfig) -> ParamStore:
    rng = np.random.default_rng(cfg.seed)
    store = ParamStore(rng_seed=cfg.seed)
    d_in = cfg.in_dim
    for layer in range(1, cfg.layers + 1):
        scale = 1.0 / np.sqrt(2 * d_in)
        store.add(f"W{layer}", rng.standard_normal((2 * d_in, cfg.hidden)) * scale)
        store.add(f"b{layer}", np.zeros((1, cfg.hidden)))
        d_in = cfg.hidden
    store.extra = {"kind": "sage", "config": vars(cfg)}
    return store


def _mean_agg(h: np.ndarray, arr: GraphArrays) -> np.ndarray:
    return _kernels.seg_mean_rows(h, arr.indices, arr.offsets)


def _mean_agg_grad(d_agg: np.ndarray, arr: GraphArrays) -> np.ndarray:
    scaled = d_agg / np.maximum(arr.deg, 1.0)[:, None]
    return _kernels.seg_sum_rows(scaled, arr.indices, arr.offsets)


def _forward(store: ParamStore, x: np.ndarray, arr: GraphArrays, layers: int):
    """Stacked h' = [h | mean_N(h)] W + b with ReLU between layers.

    The final layer stays linear: the inner-product decoder needs signed
    embeddings, otherwise every sigmoid score sits at or above 0.5 and
    thresholded metrics degenerate.
    """
    h = x
    caches = []
    for layer in range(1, layers + 1):
        agg = _mean_agg(h, arr)
        cat = np.concatenate([h, agg], axis=1)
        pre = cat @ store[f"W{layer}"] + store[f"b{layer}"]
        out = np.maximum(pre, 0.0) if layer < layers else pre
        caches.append((cat, pre, out))
        h = out
    return h, caches


def _backward(store: ParamStore, arr: GraphArrays, caches, d_out: np.ndarray,
              layers: int) -> dict[str, np.ndarray]:
    grads: dict[str, np.ndarray] = {}
    for layer in range(layers, 0, -1):
        cat, pre, _ = caches[layer - 1]
        d_pre = d_out * (pre > 0) if layer < layers else d_out
        grads[f"W{layer}"] = cat.T @ d_pre
        grads[f"b{layer}"] = d_pre.sum(axis=0, keepdims=True)
        d_cat = d_pre @ store[f"W{layer}"].T
        d_in = cat.shape[1] // 2
        d_h = d_cat[:, :d_in].copy()
        d_h += _mean_agg_grad(d_cat[:, d_in:], arr)
        d_out = d_h
    return grads


def _pair_logits(z: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return (z[u] * z[v]).sum(axis=1)


def loss_and_grads(store: ParamStore, x: np.ndarray, arr: GraphArrays,
                   u: np.ndarray, v: np.ndarray, labels: np.ndarray,
                   layers: int = 2) -> tuple[float, dict[str, np.ndarray]]:
    """BCE on sigmoid(z_u . z_v) plus gradients for every parameter."""
    z, caches = _forward(store, x, arr, layers)
    logits = _pair_logits(z, u, v)
    loss, d_logits = bce_loss_arr(logits, labels)
    dz = np.zeros_like(z)
    _kernels.scatter_add_rows(dz, u, d_logits[:, None] * z[v])
    _kernels.scatter_add_rows(dz, v, d_logits[:, None] * z[u])
    grads = _backward(store, arr, caches, dz, layers)
    return loss, grads


class SageModel:
    """Trained SAGE encoder + inner-product link decoder."""

    def __init__(self, store: ParamStore, config: SageConfig):
        self.store = store
        self.config = config

    def embed(self, features, arrays: GraphArrays | None = None,
              graph=None) -> np.ndarray:
        arr = arrays if arrays is not None else from_graph(graph)
        z, _ = _forward(self.store, features.matrix.a, arr, self.config.layers)
        return z

    def link_probability(self, z: np.ndarray, u: int, v: int) -> float:
        return float(sigmoid(np.asarray([z[u] @ z[v]]))[0])

    def save(self, path) -> None:
        self.store.save(path)

    @classmethod
    def load(cls, path) -> "SageModel":
        store = ParamStore.load(path)
        cfg = SageConfig(**store.extra["config"])
        return cls(store, cfg)


def _topk_hit_rate(z: np.ndarray, pairs: list[tuple[int, int]], k: int,
                   known: dict[int, set[int]] | None = None) -> float:
    """Fraction of (u, v) where v ranks in u's top-k decoder scores.

    Filtered ranking: u itself and u's known training partners are removed
    from the candidate list, the usual hit@k convention.
    """
    if not pairs:
        return 0.0
    hits = 0
    for u, v in pairs:
        scores = z @ z[u]
        scores[u] = -np.inf
        if known:
            for w in known.get(u, ()):
                if w != v:
                    scores[w] = -np.inf
        top = np.lexsort((np.arange(len(scores)), -scores))[:k]
        hits += int(v in top)
    return hits / len(pairs)


def train_sage_supervised(graph, features, split: EdgeSplit,
                          config: SageConfig | None = None
                          ) -> tuple[SageModel, list[LinkPredMetrics]]:
    """Full-batch training on the split's positives and sampled negatives.

    Per-epoch metrics come from the validation split; the returned model is
    the best-validation-F1 checkpoint. Deterministic under config.seed.
    """
    cfg = config or SageConfig()
    if cfg.in_dim != features.matrix.cols:
        cfg.in_dim = features.matrix.cols
    arr = from_graph(graph)
    store = _init_store(cfg)
    x = features.matrix.a

    def pairs_to_idx(pairs):
        u = np.asarray([arr.index[a] for a, _ in pairs], dtype=np.int64)
        v = np.asarray([arr.index[b] for _, b in pairs], dtype=np.int64)
        return u, v

    tr_u, tr_v = pairs_to_idx(split.train_pos + split.train_neg)
    tr_y = np.concatenate([np.ones(len(split.train_pos)),
                           np.zeros(len(split.train_neg))])
    val_pu, val_pv = pairs_to_idx(split.val_pos)
    val_nu, val_nv = pairs_to_idx(split.val_neg)
    val_pairs_idx = list(zip(val_pu.tolist(), val_pv.tolist()))
    known: dict[int, set[int]] = {}
    for a, b in zip(*pairs_to_idx(split.train_pos)):
        known.setdefault(int(a), set()).add(int(b))
        known.setdefault(int(b), set()).add(int(a))

    history: list[LinkPredMetrics] = []
    best_f1 = -1.0
    best_params = store.copy()
    for epoch in range(cfg.epochs):
        loss, grads = loss_and_grads(store, x, arr, tr_u, tr_v, tr_y,
                                     layers=cfg.layers)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"epoch {epoch}: loss={loss}")
        adam_step(store, grads, lr=cfg.lr)

        z, _ = _forward(store, x, arr, cfg.layers)
        m = eval_link_prediction(sigmoid(_pair_logits(z, val_pu, val_pv)),
                                 sigmoid(_pair_logits(z, val_nu, val_nv)),
                                 threshold=cfg.threshold)
        m.top3_accuracy = _topk_hit_rate(z, val_pairs_idx, cfg.top_k, known)
        history.append(m)
        if m.f1 > best_f1:
            best_f1 = m.f1
            best_params = store.copy()

    return SageModel(best_params, cfg), history
