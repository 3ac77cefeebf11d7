"""Finite-difference validation of every analytic backward pass."""

import numpy as np

from graphgen import (make_bipartite_matching_graph, make_erdos_function_graph,
                      synthetic_features)

from repograph.deepgraph import gae, han, sage
from repograph.deepgraph.arrays import from_graph, per_type_undirected
from repograph.deepgraph.gae import GaeConfig, _Propagator
from repograph.deepgraph.han import HanConfig, _type_groups
from repograph.deepgraph.sage import SageConfig
from repograph.numkernel import gradient_check

TOL = 1e-4
EPS = 1e-5


def _tiny_graph(seed=0):
    # 5-node function graph, dense enough that every node has neighbors
    return make_erdos_function_graph(n=5, p=0.8, seed=seed)


def _pairs(arr, rng, count=6):
    u = rng.integers(0, arr.n, count).astype(np.int64)
    v = (u + 1 + rng.integers(0, arr.n - 1, count)).astype(np.int64) % arr.n
    y = rng.integers(0, 2, count).astype(np.float64)
    return u, v, y


def test_sage_single_layer_bce_gradients():
    g = _tiny_graph(1)
    feats = synthetic_features(g, dim=6, seed=1)
    arr = from_graph(g)
    rng = np.random.default_rng(2)
    u, v, y = _pairs(arr, rng)
    cfg = SageConfig(in_dim=6, hidden=5, layers=1, seed=3)
    store = sage._init_store(cfg)

    err = gradient_check(
        lambda s: sage.loss_and_grads(s, feats.matrix.a, arr, u, v, y, layers=1),
        store, epsilon=EPS)
    assert err <= TOL, err


def test_sage_two_layer_bce_gradients():
    g = _tiny_graph(4)
    feats = synthetic_features(g, dim=5, seed=4)
    arr = from_graph(g)
    rng = np.random.default_rng(5)
    u, v, y = _pairs(arr, rng)
    cfg = SageConfig(in_dim=5, hidden=4, layers=2, seed=6)
    store = sage._init_store(cfg)

    err = gradient_check(
        lambda s: sage.loss_and_grads(s, feats.matrix.a, arr, u, v, y, layers=2),
        store, epsilon=EPS)
    assert err <= TOL, err


def test_gae_gcn_mlp_bce_gradients():
    g = _tiny_graph(7)
    feats = synthetic_features(g, dim=6, seed=7)
    arr = from_graph(g)
    prop = _Propagator(arr)
    rng = np.random.default_rng(8)
    u, v, y = _pairs(arr, rng)
    cfg = GaeConfig(in_dim=6, hidden=5, latent=4, decoder_hidden=3, seed=9)
    store = gae._init_store(cfg)

    err = gradient_check(
        lambda s: gae.loss_and_grads(s, feats.matrix.a, prop, u, v, y),
        store, epsilon=EPS)
    assert err <= TOL, err


def test_han_gat_infonce_gradients():
    g = make_bipartite_matching_graph(pairs=3, seed=10)  # 6 nodes, 2 types
    feats = synthetic_features(g, dim=5, seed=10)
    arr = from_graph(g)
    csrs = per_type_undirected(g, arr)
    groups = _type_groups(arr)
    cfg = HanConfig(in_dim=5, att_dim=4, latent=3, negatives=2, seed=11)
    store = han._init_store(cfg, sorted(csrs))
    anchors = arr.und_edges[:, 0]
    positives = arr.und_edges[:, 1]
    rng = np.random.default_rng(12)
    negatives = rng.integers(0, arr.n, size=(len(anchors), cfg.negatives))

    err = gradient_check(
        lambda s: han.infonce_loss_and_grads(s, cfg, feats.matrix.a, csrs,
                                             groups, anchors, positives,
                                             negatives),
        store, epsilon=EPS)
    assert err <= TOL, err


def test_han_contrastive_gradients():
    g = make_bipartite_matching_graph(pairs=3, seed=13)
    feats = synthetic_features(g, dim=4, seed=13)
    arr = from_graph(g)
    csrs = per_type_undirected(g, arr)
    groups = _type_groups(arr)
    cfg = HanConfig(in_dim=4, att_dim=3, latent=3, seed=14)
    store = han._init_store(cfg, sorted(csrs))
    rng = np.random.default_rng(15)
    x = feats.matrix.a
    x_shuf = x[rng.permutation(arr.n)]

    err = gradient_check(
        lambda s: han.contrastive_loss_and_grads(s, cfg, x, x_shuf, csrs, groups),
        store, epsilon=EPS)
    assert err <= TOL, err


def test_kblam_end_to_end_gradients():
    """Attention + scoring + softmax CE on a 3-node window."""
    from repograph.kblam import KblamConfig
    from repograph.kblam.model import Window, init_store
    from repograph.kblam.train import sample_loss_and_grads

    # seed chosen so no scoring unit is dead on this window: an exactly-zero
    # gradient coordinate turns the relative-error denominator floor (1e-8)
    # into an amplifier of plain finite-difference round-off (~1e-11)
    rng = np.random.default_rng(0)
    cfg = KblamConfig(feature_dim=6, query_dim=6, model_dim=8, heads=2,
                      score_hidden=5, dropout=0.0, seed=0)
    store = init_store(cfg)
    window = Window(
        node_ids=["a", "b", "c"],
        feature_rows=rng.standard_normal((3, 6)),
        indices=np.array([1, 0, 2, 1], dtype=np.int64),
        offsets=np.array([0, 1, 3, 4], dtype=np.int64),
        parents={"a": None, "b": "a", "c": "b"},
    )
    qvec = rng.standard_normal(6)

    def f(s):
        grads: dict = {}
        loss = sample_loss_and_grads(s, cfg, qvec, window, [1], grads,
                                     dropout_rng=None)
        return loss, grads

    err = gradient_check(f, store, epsilon=EPS)
    assert err <= TOL, err
