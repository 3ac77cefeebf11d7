"""Heterogeneous attention embeddings with two self-supervised objectives.

Per edge type, a single-head attention layer aggregates neighbors
(LeakyReLU edge scores, per-neighborhood softmax); a semantic-attention
stage then fuses the per-type channels with one weight distribution per
node type, followed by a linear projection to the latent space.

Objectives: ``contrastive`` scores true vs feature-shuffled embeddings
against a mean-summary discriminator under BCE; ``infonce`` pulls edge
endpoints together against globally sampled negatives at temperature tau.
All gradients are analytic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import GraphTooSmall, NonFiniteLoss
from ..numkernel import ParamStore, adam_step, bce_loss_arr
from .arrays import from_graph, per_type_undirected
from .metrics import silhouette_score

_EPS = 1e-12


@dataclass
class HanConfig:
    in_dim: int = 800
    att_dim: int = 128
    latent: int = 64
    slope: float = 0.2
    tau: float = 0.2
    negatives: int = 16
    epochs: int = 30
    lr: float = 0.005
    seed: int = 0
    loss_mode: str = "contrastive"


def _init_store(cfg: HanConfig, edge_types: list[str]) -> ParamStore:
    rng = np.random.default_rng(cfg.seed)
    store = ParamStore(rng_seed=cfg.seed)
    for et in edge_types:
        store.add(f"W::{et}", rng.standard_normal((cfg.in_dim, cfg.att_dim))
                  / np.sqrt(cfg.in_dim))
        store.add(f"a::{et}", rng.standard_normal((2 * cfg.att_dim, 1))
                  / np.sqrt(2 * cfg.att_dim))
    store.add("Ws", rng.standard_normal((cfg.att_dim, cfg.att_dim))
              / np.sqrt(cfg.att_dim))
    store.add("bs", np.zeros((1, cfg.att_dim)))
    store.add("q", rng.standard_normal((cfg.att_dim, 1)) / np.sqrt(cfg.att_dim))
    store.add("P", rng.standard_normal((cfg.att_dim, cfg.latent))
              / np.sqrt(cfg.att_dim))
    store.extra = {"kind": "han", "config": vars(cfg), "edge_types": edge_types}
    return store


def _edge_arrays(indices: np.ndarray, offsets: np.ndarray):
    seg_len = np.diff(offsets)
    e_dst = np.repeat(np.arange(len(seg_len), dtype=np.int64), seg_len)
    return indices, e_dst, offsets


def _gat_forward(store, etype: str, x: np.ndarray, csr, slope: float):
    e_src, e_dst, offsets = _edge_arrays(*csr)
    h = x @ store[f"W::{etype}"]
    a = store[f"a::{etype}"][:, 0]
    d = h.shape[1]
    s_src = h @ a[:d]
    s_dst = h @ a[d:]
    g = s_src[e_src] + s_dst[e_dst]
    act = np.where(g > 0, g, slope * g)
    # per-destination softmax; self loops guarantee non-empty segments
    seg_starts = offsets[:-1]
    seg_max = np.maximum.reduceat(act, seg_starts)
    ex = np.exp(act - seg_max[e_dst])
    seg_sum = np.add.reduceat(ex, seg_starts)
    alpha = ex / seg_sum[e_dst]
    out = np.add.reduceat(alpha[:, None] * h[e_src], seg_starts, axis=0)
    cache = (h, g, alpha, e_src, e_dst, seg_starts)
    return out, cache


def _gat_backward(store, etype: str, x: np.ndarray, cache, d_out: np.ndarray,
                  slope: float, grads: dict) -> None:
    h, g, alpha, e_src, e_dst, seg_starts = cache
    a = store[f"a::{etype}"][:, 0]
    d = h.shape[1]

    d_alpha = (d_out[e_dst] * h[e_src]).sum(axis=1)
    dh = np.zeros_like(h)
    _kernels.scatter_add_rows(dh, e_src, alpha[:, None] * d_out[e_dst])

    seg_dot = np.add.reduceat(alpha * d_alpha, seg_starts)
    d_act = alpha * (d_alpha - seg_dot[e_dst])
    d_g = d_act * np.where(g > 0, 1.0, slope)

    grads_a = np.empty((2 * d, 1))
    grads_a[:d, 0] = (d_g[:, None] * h[e_src]).sum(axis=0)
    grads_a[d:, 0] = (d_g[:, None] * h[e_dst]).sum(axis=0)
    _kernels.scatter_add_rows(dh, e_src, d_g[:, None] * a[None, :d])
    _kernels.scatter_add_rows(dh, e_dst, d_g[:, None] * a[None, d:])

    grads[f"a::{etype}"] = grads.get(f"a::{etype}", 0) + grads_a
    grads[f"W::{etype}"] = grads.get(f"W::{etype}", 0) + x.T @ dh


def _forward(store, cfg: HanConfig, x: np.ndarray, csrs: dict,
             type_groups: dict[str, np.ndarray]):
    """Full forward pass: per-type attention, semantic fusion, projection."""
    etypes = sorted(csrs)
    outs, caches = {}, {}
    for et in etypes:
        outs[et], caches[et] = _gat_forward(store, et, x, csrs[et], cfg.slope)

    ws, bs, q = store["Ws"], store["bs"], store["q"][:, 0]
    sem: dict[str, dict] = {}
    n = x.shape[0]
    w_scores = {}
    hs = {}
    for et in etypes:
        m = outs[et] @ ws + bs
        hm = np.tanh(m)
        hs[et] = hm
        w_scores[et] = hm @ q
    betas = {}
    for t, rows in type_groups.items():
        raw = np.asarray([w_scores[et][rows].mean() for et in etypes])
        shifted = np.exp(raw - raw.max())
        betas[t] = shifted / shifted.sum()

    fused = np.zeros((n, cfg.att_dim))
    beta_per_node = np.zeros((n, len(etypes)))
    for t, rows in type_groups.items():
        for j, et in enumerate(etypes):
            beta_per_node[rows, j] = betas[t][j]
    for j, et in enumerate(etypes):
        fused += beta_per_node[:, j][:, None] * outs[et]
    z = fused @ store["P"]
    cache = {"outs": outs, "gat": caches, "hs": hs, "betas": betas,
             "beta_per_node": beta_per_node, "fused": fused,
             "etypes": etypes, "type_groups": type_groups}
    return z, cache


def _backward(store, cfg: HanConfig, x: np.ndarray, cache, dz: np.ndarray,
              grads: dict) -> None:
    etypes = cache["etypes"]
    type_groups = cache["type_groups"]
    outs, hs = cache["outs"], cache["hs"]
    beta_per_node = cache["beta_per_node"]
    fused = cache["fused"]
    ws, q = store["Ws"], store["q"][:, 0]

    grads["P"] = grads.get("P", 0) + fused.T @ dz
    d_fused = dz @ store["P"].T

    d_outs = {et: beta_per_node[:, j][:, None] * d_fused
              for j, et in enumerate(etypes)}

    # beta path: dβ[t, j] = sum_{v in t} d_fused[v] . out_et[v]
    d_ws = np.zeros_like(ws)
    d_bs = np.zeros((1, cfg.att_dim))
    d_q = np.zeros_like(q)
    for t, rows in type_groups.items():
        beta = cache["betas"][t]
        d_beta = np.asarray([(d_fused[rows] * outs[et][rows]).sum()
                             for et in etypes])
        d_w = beta * (d_beta - float(beta @ d_beta))
        inv = 1.0 / len(rows)
        for j, et in enumerate(etypes):
            d_score = d_w[j] * inv  # each node in the group contributes the mean
            hm = hs[et][rows]
            d_q += d_score * hm.sum(axis=0)
            dm = d_score * (1.0 - hm * hm) * q[None, :]
            d_ws += outs[et][rows].T @ dm
            d_bs += dm.sum(axis=0, keepdims=True)
            d_outs[et][rows] += dm @ ws.T
    grads["Ws"] = grads.get("Ws", 0) + d_ws
    grads["bs"] = grads.get("bs", 0) + d_bs
    grads["q"] = grads.get("q", 0) + d_q[:, None]

    for et in etypes:
        _gat_backward(store, et, x, cache["gat"][et], d_outs[et], cfg.slope, grads)


def _normalize_rows(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    norms = np.sqrt((z * z).sum(axis=1))
    safe = np.maximum(norms, _EPS)
    return z / safe[:, None], safe


def contrastive_loss_and_grads(store, cfg, x, x_shuf, csrs, type_groups):
    """DGI-style BCE: true embeddings vs shuffled, mean-summary discriminator."""
    z_pos, cache_pos = _forward(store, cfg, x, csrs, type_groups)
    z_neg, cache_neg = _forward(store, cfg, x_shuf, csrs, type_groups)
    n = z_pos.shape[0]
    s = z_pos.mean(axis=0)
    logits = np.concatenate([z_pos @ s, z_neg @ s])
    labels = np.concatenate([np.ones(n), np.zeros(n)])
    loss, d_logits = bce_loss_arr(logits, labels)
    g_pos, g_neg = d_logits[:n], d_logits[n:]
    dz_pos = g_pos[:, None] * s[None, :]
    dz_neg = g_neg[:, None] * s[None, :]
    ds = z_pos.T @ g_pos + z_neg.T @ g_neg
    dz_pos += ds[None, :] / n
    grads: dict = {}
    _backward(store, cfg, x, cache_pos, dz_pos, grads)
    _backward(store, cfg, x_shuf, cache_neg, dz_neg, grads)
    return loss, grads


def infonce_loss_and_grads(store, cfg, x, csrs, type_groups, anchors,
                           positives, negatives):
    """-log softmax(sim(anchor,pos)/tau over pos+sampled negatives)."""
    z, cache = _forward(store, cfg, x, csrs, type_groups)
    zn, norms = _normalize_rows(z)
    n_edges = len(anchors)
    total = 0.0
    dzn = np.zeros_like(z)
    for e in range(n_edges):
        u = anchors[e]
        cands = np.concatenate([[positives[e]], negatives[e]])
        sims = zn[cands] @ zn[u]
        c = sims / cfg.tau
        c -= c.max()
        p = np.exp(c)
        p /= p.sum()
        total += -np.log(max(p[0], _EPS))
        d_c = p.copy()
        d_c[0] -= 1.0
        d_sims = d_c / cfg.tau / n_edges
        dzn[u] += d_sims @ zn[cands]
        for j, cand in enumerate(cands):
            dzn[cand] += d_sims[j] * zn[u]
    # back through row normalization: d z = (d zn - (d zn . zn) zn) / |z|
    proj = (dzn * zn).sum(axis=1, keepdims=True)
    dz = (dzn - proj * zn) / norms[:, None]
    grads: dict = {}
    _backward(store, cfg, x, cache, dz, grads)
    return total / max(n_edges, 1), grads


class HanModel:
    def __init__(self, store: ParamStore, config: HanConfig):
        self.store = store
        self.config = config
        self.semantic_weights: dict[str, dict[str, float]] = {}
        self.history: list[float] = []

    def embed(self, features, graph) -> tuple[np.ndarray, list[str]]:
        arr = from_graph(graph)
        csrs = per_type_undirected(graph, arr)
        groups = _type_groups(arr)
        z, cache = _forward(self.store, self.config, features.matrix.a,
                            csrs, groups)
        self.semantic_weights = {
            t: {et: float(b) for et, b in zip(cache["etypes"], cache["betas"][t])}
            for t in cache["betas"]}
        return z, arr.node_ids

    def save(self, path) -> None:
        self.store.save(path)

    @classmethod
    def load(cls, path) -> "HanModel":
        store = ParamStore.load(path)
        return cls(store, HanConfig(**store.extra["config"]))


def _type_groups(arr) -> dict[str, np.ndarray]:
    groups: dict[str, list[int]] = {}
    for i, t in enumerate(arr.node_types):
        groups.setdefault(t, []).append(i)
    return {t: np.asarray(ix, dtype=np.int64) for t, ix in sorted(groups.items())}


def train_han(graph, features, loss_mode: str = "contrastive",
              config: HanConfig | None = None):
    """Returns (model, per-type latent embeddings, silhouette-or-None).

    Single-type graphs still train; the silhouette is then undefined and
    reported as None. Positive-edge cosine is additionally tracked for the
    infonce mode (model.history carries the per-epoch loss).
    """
    cfg = config or HanConfig()
    cfg.loss_mode = loss_mode
    if cfg.in_dim != features.matrix.cols:
        cfg.in_dim = features.matrix.cols
    arr = from_graph(graph)
    csrs = per_type_undirected(graph, arr)
    if not csrs:
        raise GraphTooSmall("graph has no edges to attend over")
    groups = _type_groups(arr)
    store = _init_store(cfg, sorted(csrs))
    x = features.matrix.a
    rng = np.random.default_rng(cfg.seed + 7)

    edges = arr.und_edges
    model = HanModel(store, cfg)
    for epoch in range(cfg.epochs):
        if loss_mode == "contrastive":
            x_shuf = x[rng.permutation(arr.n)]
            loss, grads = contrastive_loss_and_grads(store, cfg, x, x_shuf,
                                                     csrs, groups)
        elif loss_mode == "infonce":
            if len(edges) == 0:
                raise GraphTooSmall("infonce requires at least one edge")
            anchors = edges[:, 0]
            positives = edges[:, 1]
            negatives = rng.integers(0, arr.n, size=(len(edges), cfg.negatives))
            # shift samples that collide with the anchor or its positive
            for _ in range(2):
                collide = (negatives == anchors[:, None]) | \
                          (negatives == positives[:, None])
                if not collide.any():
                    break
                negatives = np.where(collide, (negatives + 1) % arr.n, negatives)
            loss, grads = infonce_loss_and_grads(store, cfg, x, csrs, groups,
                                                 anchors, positives, negatives)
        else:
            raise ValueError(f"unknown loss mode {loss_mode!r}")
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"epoch {epoch}: loss={loss}")
        adam_step(store, grads, lr=cfg.lr)
        model.history.append(float(loss))

    z, node_ids = model.embed(features, graph)
    per_type = {t: ([node_ids[i] for i in rows], z[rows])
                for t, rows in groups.items()}
    sil = silhouette_score(z, arr.node_types)
    return model, per_type, sil
