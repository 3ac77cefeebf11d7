"""KBLam training behavior: overfit sanity, learning, determinism, answering."""

import numpy as np
import pytest

from repograph.deepgraph import compile_query, traverse_path
from repograph.errors import EmptyDataset, UnknownCenter
from repograph.featurize import HashedSubwordEncoder, featurize_nodes
from repograph.kblam import (KblamConfig, KblamModel, QaDataset,
                             generate_dataset, train_kblam)
from repograph.kblam.train import answer


@pytest.fixture(scope="module")
def fixture_features(fixture_graph):
    return featurize_nodes(fixture_graph, HashedSubwordEncoder())


@pytest.fixture(scope="module")
def trained(fixture_graph, fixture_features):
    ds = generate_dataset(fixture_graph, sizes=(200, 50), seed=1)
    cfg = KblamConfig(epochs=30, lr=1e-3, seed=1)
    model, history = train_kblam(fixture_graph, fixture_features, ds, cfg)
    return model, history, ds


def test_single_sample_overfit_loss_strictly_decreases(fixture_graph,
                                                       fixture_features):
    ds_full = generate_dataset(fixture_graph, sizes=(10, 2), seed=3)
    one = QaDataset(train=ds_full.train[:1], val=[], provenance={})
    cfg = KblamConfig(epochs=10, lr=1e-3, dropout=0.0, seed=3)
    _, history = train_kblam(fixture_graph, fixture_features, one, cfg)
    losses = [m.train_loss for m in history]
    assert len(losses) == 10
    assert all(b < a for a, b in zip(losses, losses[1:])), losses


def test_training_learns_fixture_questions(trained):
    _, history, _ = trained
    best_top1 = max(m.top1 for m in history)
    best_top3 = max(m.top3 for m in history)
    assert best_top1 >= 0.6
    assert best_top3 >= 0.8
    assert history[-1].train_loss < history[0].train_loss


def test_training_determinism(fixture_graph, fixture_features):
    ds = generate_dataset(fixture_graph, sizes=(20, 5), seed=4)
    cfg = KblamConfig(epochs=4, lr=1e-3, seed=4)
    _, h1 = train_kblam(fixture_graph, fixture_features, ds, cfg)
    _, h2 = train_kblam(fixture_graph, fixture_features, ds, cfg)
    assert [m.as_dict() for m in h1] == [m.as_dict() for m in h2]


def test_empty_dataset_raises(fixture_graph, fixture_features):
    with pytest.raises(EmptyDataset):
        train_kblam(fixture_graph, fixture_features,
                    QaDataset(train=[], val=[], provenance={}),
                    KblamConfig(epochs=1, seed=0))


def test_checkpoint_roundtrip(trained, tmp_path, fixture_graph,
                              fixture_features):
    model, _, _ = trained
    path = tmp_path / "kblam.ckpt"
    model.save(path)
    loaded = KblamModel.load(path)
    assert loaded.config.model_dim == model.config.model_dim
    out_a = answer(model, fixture_graph, fixture_features,
                   "Which commits are included in pull request #1?",
                   window_hint=("pr:#1", 2))
    out_b = answer(loaded, fixture_graph, fixture_features,
                   "Which commits are included in pull request #1?",
                   window_hint=("pr:#1", 2))
    assert out_a["ranked"] == out_b["ranked"]


def test_answer_matches_traversal_oracle(trained, fixture_graph,
                                         fixture_features):
    model, _, _ = trained
    question = "Which functions were changed by commits in pull request #1?"
    out = answer(model, fixture_graph, fixture_features, question,
                 window_hint=("pr:#1", 3))
    oracle = {nid for nid, _ in
              traverse_path(fixture_graph, compile_query(fixture_graph, question))}
    top3 = [nid for nid, _ in out["ranked"][:3]]
    assert set(top3) <= oracle
    assert out["window"]["center"] == "pr:#1"
    # witness paths start at the center and end at the ranked node
    for nid, path in out["witness_paths"].items():
        assert path[0] == "pr:#1" and path[-1] == nid


def test_answer_attention_trace_sums_to_one(trained, fixture_graph,
                                            fixture_features):
    model, _, _ = trained
    out = answer(model, fixture_graph, fixture_features,
                 "Who authored commit 13909203?", window_hint=None)
    weights = np.asarray(list(out["attention"]["averaged"].values()))
    assert abs(weights.sum() - 1.0) < 1e-9
    assert (weights >= 0).all()
    assert isinstance(out["low_confidence"], bool)


def test_answer_accepts_up_to_five_hops(trained, fixture_graph,
                                        fixture_features):
    model, _, _ = trained
    out = answer(model, fixture_graph, fixture_features, "What links here?",
                 window_hint=("pr:#1", 5))
    assert out["window"]["hops"] == 5
    out7 = answer(model, fixture_graph, fixture_features, "What links here?",
                  window_hint=("pr:#1", 7))
    assert out7["window"]["hops"] == 5  # clamped at the supported ceiling


def test_answer_unknown_center(trained, fixture_graph, fixture_features):
    model, _, _ = trained
    with pytest.raises(UnknownCenter):
        answer(model, fixture_graph, fixture_features, "x",
               window_hint=("pr:#404", 2))
