"""Unsupervised link prediction: two GCN layers + MLP decoder on node pairs.

The training signal is adjacency reconstruction (true edges vs sampled
non-edges under binary cross-entropy); no labels are required. Evaluation
uses an internally held-out edge split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import NonFiniteLoss
from ..numkernel import ParamStore, adam_step, bce_loss_arr, sigmoid
from .arrays import (GraphArrays, allowed_type_pairs, from_graph,
                     gcn_propagation_edges)
from .metrics import LinkPredMetrics, eval_link_prediction
from .split import split_edges


@dataclass
class GaeConfig:
    in_dim: int = 800
    hidden: int = 256
    latent: int = 128
    decoder_hidden: int = 64
    epochs: int = 60
    lr: float = 0.01
    threshold: float = 0.5
    seed: int = 0
    split_ratios: tuple[float, float, float] = (0.85, 0.05, 0.10)


def _init_store(cfg: GaeConfig) -> ParamStore:
    rng = np.random.default_rng(cfg.seed)
    store = ParamStore(rng_seed=cfg.seed)
    store.add("Wg1", rng.standard_normal((cfg.in_dim, cfg.hidden)) / np.sqrt(cfg.in_dim))
    store.add("Wg2", rng.standard_normal((cfg.hidden, cfg.latent)) / np.sqrt(cfg.hidden))
    store.add("Wd1", rng.standard_normal((2 * cfg.latent, cfg.decoder_hidden))
              / np.sqrt(2 * cfg.latent))
    store.add("bd1", np.zeros((1, cfg.decoder_hidden)))
    store.add("Wd2", rng.standard_normal((cfg.decoder_hidden, 1))
              / np.sqrt(cfg.decoder_hidden))
    store.add("bd2", np.zeros((1, 1)))
    store.extra = {"kind": "gae", "config": {**vars(cfg),
                                             "split_ratios": list(cfg.split_ratios)}}
    return store


class _Propagator:
    """Symmetric-normalized (A+I) message passing as edge-list SpMM."""

    def __init__(self, arr: GraphArrays):
        self.src, self.dst, self.coef = gcn_propagation_edges(arr)
        self.n = arr.n

    def __call__(self, h: np.ndarray) -> np.ndarray:
        return _kernels.spmm_edges(self.src, self.dst, self.coef, h, self.n)


def _encode(store: ParamStore, x: np.ndarray, prop: _Propagator):
    ax = prop(x)
    pre1 = ax @ store["Wg1"]
    h1 = np.maximum(pre1, 0.0)
    ah = prop(h1)
    pre2 = ah @ store["Wg2"]
    z = np.maximum(pre2, 0.0)
    return z, (ax, pre1, h1, ah, pre2)


def _decode(store: ParamStore, z: np.ndarray, u: np.ndarray, v: np.ndarray):
    cat = np.concatenate([z[u], z[v]], axis=1)
    pre_h = cat @ store["Wd1"] + store["bd1"]
    h = np.maximum(pre_h, 0.0)
    logits = (h @ store["Wd2"] + store["bd2"]).ravel()
    return logits, (cat, pre_h, h)


def loss_and_grads(store: ParamStore, x: np.ndarray, prop: _Propagator,
                   u: np.ndarray, v: np.ndarray, labels: np.ndarray
                   ) -> tuple[float, dict[str, np.ndarray]]:
    z, enc_cache = _encode(store, x, prop)
    logits, dec_cache = _decode(store, z, u, v)
    loss, d_logits = bce_loss_arr(logits, labels)

    ax, pre1, h1, ah, pre2 = enc_cache
    cat, pre_h, h = dec_cache
    d_logits = d_logits[:, None]
    grads = {
        "Wd2": h.T @ d_logits,
        "bd2": d_logits.sum(axis=0, keepdims=True),
    }
    dh = (d_logits @ store["Wd2"].T) * (pre_h > 0)
    grads["Wd1"] = cat.T @ dh
    grads["bd1"] = dh.sum(axis=0, keepdims=True)
    d_cat = dh @ store["Wd1"].T
    latent = z.shape[1]
    dz = np.zeros_like(z)
    _kernels.scatter_add_rows(dz, u, d_cat[:, :latent])
    _kernels.scatter_add_rows(dz, v, d_cat[:, latent:])

    d_pre2 = dz * (pre2 > 0)
    grads["Wg2"] = ah.T @ d_pre2
    d_ah = d_pre2 @ store["Wg2"].T
    d_h1 = prop(d_ah)  # the propagation operator is symmetric
    d_pre1 = d_h1 * (pre1 > 0)
    grads["Wg1"] = ax.T @ d_pre1
    return loss, grads


class GaeModel:
    def __init__(self, store: ParamStore, config: GaeConfig):
        self.store = store
        self.config = config
        self.history: list[LinkPredMetrics] = []

    def embed(self, features, graph=None, arrays: GraphArrays | None = None) -> np.ndarray:
        arr = arrays if arrays is not None else from_graph(graph)
        z, _ = _encode(self.store, features.matrix.a, _Propagator(arr))
        return z

    def pair_probability(self, z: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        logits, _ = _decode(self.store, z, u, v)
        return sigmoid(logits)

    def save(self, path) -> None:
        self.store.save(path)

    @classmethod
    def load(cls, path) -> "GaeModel":
        store = ParamStore.load(path)
        raw = dict(store.extra["config"])
        raw["split_ratios"] = tuple(raw["split_ratios"])
        return cls(store, GaeConfig(**raw))


def _sample_negatives(rng, arr: GraphArrays, edge_set: set, count: int
                      ) -> tuple[np.ndarray, np.ndarray]:
    compatible = allowed_type_pairs()
    types = arr.node_types
    us, vs = [], []
    attempts = 0
    while len(us) < count and attempts < count * 200 + 10000:
        attempts += 1
        a = int(rng.integers(0, arr.n))
        b = int(rng.integers(0, arr.n))
        if a == b or (min(a, b), max(a, b)) in edge_set:
            continue
        tp = (min(types[a], types[b]), max(types[a], types[b]))
        if tp not in compatible:
            continue
        us.append(a)
        vs.append(b)
    return np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)


def train_gae(graph, features, config: GaeConfig | None = None
              ) -> tuple[GaeModel, LinkPredMetrics]:
    """Train on the internal split's positives vs per-epoch sampled negatives.

    Returns the best-validation-AUC checkpoint and its held-out test
    metrics; the per-epoch trace is kept on ``model.history``.
    """
    cfg = config or GaeConfig()
    if cfg.in_dim != features.matrix.cols:
        cfg.in_dim = features.matrix.cols
    arr = from_graph(graph)
    split = split_edges(graph, ratios=cfg.split_ratios, seed=cfg.seed, arrays=arr)
    prop = _Propagator(arr)
    store = _init_store(cfg)
    x = features.matrix.a
    rng = np.random.default_rng(cfg.seed + 1)

    def idx(pairs):
        return (np.asarray([arr.index[a] for a, _ in pairs], dtype=np.int64),
                np.asarray([arr.index[b] for _, b in pairs], dtype=np.int64))

    tr_u, tr_v = idx(split.train_pos)
    edge_set = {(min(int(a), int(b)), max(int(a), int(b)))
                for a, b in zip(*idx(split.positives()))}
    val_pu, val_pv = idx(split.val_pos)
    val_nu, val_nv = idx(split.val_neg)
    test_pu, test_pv = idx(split.test_pos)
    test_nu, test_nv = idx(split.test_neg)

    model = GaeModel(store, cfg)
    best_auc = -1.0
    best_params = store.copy()
    for epoch in range(cfg.epochs):
        neg_u, neg_v = _sample_negatives(rng, arr, edge_set, len(tr_u))
        u = np.concatenate([tr_u, neg_u])
        v = np.concatenate([tr_v, neg_v])
        y = np.concatenate([np.ones(len(tr_u)), np.zeros(len(neg_u))])
        loss, grads = loss_and_grads(store, x, prop, u, v, y)
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"epoch {epoch}: loss={loss}")
        adam_step(store, grads, lr=cfg.lr)

        z, _ = _encode(store, x, prop)
        pos_p, _ = _decode(store, z, val_pu, val_pv)
        neg_p, _ = _decode(store, z, val_nu, val_nv)
        m = eval_link_prediction(sigmoid(pos_p), sigmoid(neg_p), cfg.threshold)
        model.history.append(m)
        if m.roc_auc > best_auc:
            best_auc = m.roc_auc
            best_params = store.copy()

    model.store = best_params
    z, _ = _encode(best_params, x, prop)
    pos_p, _ = _decode(best_params, z, test_pu, test_pv)
    neg_p, _ = _decode(best_params, z, test_nu, test_nv)
    final = eval_link_prediction(sigmoid(pos_p), sigmoid(neg_p), cfg.threshold)
    return model, final
