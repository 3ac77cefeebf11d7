"""KBLam training loop and explainable answering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..deepgraph.traverse import text_similarity_seeds
from ..errors import EmptyDataset, NonFiniteLoss
from ..featurize.encoder import encode_text
from ..numkernel import ParamStore, adam_step
from .dataset import QaDataset, QaSample
from .model import (AttentionTrace, KblamConfig, Window, build_window,
                    encode_subgraph, encode_subgraph_backward, init_store,
                    rectangular_attention, rectangular_attention_backward,
                    score_nodes, score_nodes_backward)


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    top1: float
    top3: float
    precision: float
    recall: float
    f1: float
    mrr: float

    def as_dict(self) -> dict:
        return vars(self).copy()


class KblamModel:
    def __init__(self, store: ParamStore, config: KblamConfig):
        self.store = store
        self.config = config
        self.history: list[EpochMetrics] = []

    def save(self, path) -> None:
        self.store.save(path)

    @classmethod
    def load(cls, path) -> "KblamModel":
        store = ParamStore.load(path)
        return cls(store, KblamConfig(**store.extra["config"]))


def sample_loss_and_grads(store, cfg, query_vec, window: Window,
                          answer_rows: list[int], grads,
                          dropout_rng: np.random.Generator | None = None
                          ) -> float:
    """Softmax CE over unmasked window nodes, mean over the answer set."""
    h, g_cache = encode_subgraph(store, window)
    mask = np.ones(len(window.node_ids), dtype=bool)
    attended, _, a_cache = rectangular_attention(store, cfg, query_vec, h, mask)
    dropout_mask = None
    if dropout_rng is not None and cfg.dropout > 0:
        keep = (dropout_rng.random((h.shape[0], cfg.score_hidden))
                >= cfg.dropout)
        dropout_mask = keep / (1.0 - cfg.dropout)
    scores, s_cache = score_nodes(store, cfg, attended, h, mask, dropout_mask)

    shifted = scores - scores.max()
    ex = np.exp(shifted)
    p = ex / ex.sum()
    answers = np.asarray(answer_rows)
    loss = float(-np.log(np.maximum(p[answers], 1e-300)).mean())

    d_scores = p.copy()
    d_scores[answers] -= 1.0 / len(answers)

    d_attended, d_nodes = score_nodes_backward(store, cfg, s_cache, d_scores,
                                               mask, dropout_mask, grads)
    d_nodes = d_nodes + rectangular_attention_backward(
        store, cfg, query_vec, h, mask, a_cache, d_attended, grads)
    encode_subgraph_backward(store, g_cache, d_nodes, grads)
    return loss


def _rank_metrics(scores: np.ndarray, node_ids: list[str],
                  answers: set[str]) -> tuple[float, float, float, float,
                                              float, float]:
    order = np.lexsort((np.asarray(node_ids, dtype=object), -scores))
    ranked = [node_ids[i] for i in order]
    top1 = 1.0 if ranked[0] in answers else 0.0
    top3 = 1.0 if any(r in answers for r in ranked[:3]) else 0.0
    k = len(answers)
    pred = set(ranked[:k])
    tp = len(pred & answers)
    precision = tp / k
    recall = tp / len(answers)
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall else 0.0)
    mrr = 0.0
    for rank, nid in enumerate(ranked, start=1):
        if nid in answers:
            mrr = 1.0 / rank
            break
    return top1, top3, precision, recall, f1, mrr


def evaluate(store, cfg, samples: list[QaSample], windows: dict, queries: dict
             ) -> tuple[float, float, float, float, float, float]:
    agg = np.zeros(6)
    for s in samples:
        window = windows[(s.window_center, s.window_hops)]
        h, _ = encode_subgraph(store, window)
        mask = np.ones(len(window.node_ids), dtype=bool)
        attended, _, _ = rectangular_attention(store, cfg, queries[s.question],
                                               h, mask)
        scores, _ = score_nodes(store, cfg, attended, h, mask, None)
        agg += np.asarray(_rank_metrics(scores, window.node_ids,
                                        set(s.answer_node_ids)))
    agg /= max(len(samples), 1)
    return tuple(agg)  # type: ignore[return-value]


def train_kblam(graph, features, dataset: QaDataset,
                config: KblamConfig | None = None, seed: int | None = None,
                encoder=None) -> tuple[KblamModel, list[EpochMetrics]]:
    """Mini-batch Adam on softmax CE; best-validation-top1 checkpoint.

    Paraphrases rotate into the training question text per epoch; windows
    and query encodings are structure-cached up front. Deterministic under
    the seed.
    """
    cfg = config or KblamConfig()
    if seed is not None:
        cfg.seed = seed
    if cfg.feature_dim != features.matrix.cols:
        cfg.feature_dim = features.matrix.cols
    if not dataset.train:
        raise EmptyDataset("no training samples")
    if encoder is None:
        from ..featurize.encoder import HashedSubwordEncoder
        encoder = HashedSubwordEncoder()

    store = init_store(cfg)
    rng = np.random.default_rng(cfg.seed + 1)

    windows: dict[tuple[str, int], Window] = {}
    queries: dict[str, np.ndarray] = {}
    for s in dataset.train + dataset.val:
        key = (s.window_center, s.window_hops)
        if key not in windows:
            windows[key] = build_window(graph, features, *key)
        for text in [s.question] + s.paraphrases:
            if text not in queries:
                queries[text] = encode_text(encoder, text)

    answer_rows = {}
    for s in dataset.train:
        window = windows[(s.window_center, s.window_hops)]
        pos = {nid: i for i, nid in enumerate(window.node_ids)}
        answer_rows[id(s)] = [pos[a] for a in s.answer_node_ids]

    model = KblamModel(store, cfg)
    best_top1 = -1.0
    best_params = store.copy()
    n_train = len(dataset.train)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n_train)
        total = 0.0
        for start in range(0, n_train, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            grads: dict = {}
            for i in batch:
                s = dataset.train[i]
                texts = [s.question] + s.paraphrases
                qtext = texts[epoch % len(texts)]
                window = windows[(s.window_center, s.window_hops)]
                total += sample_loss_and_grads(
                    store, cfg, queries[qtext], window, answer_rows[id(s)],
                    grads, dropout_rng=rng)
            for name in grads:
                grads[name] = grads[name] / len(batch)
            adam_step(store, grads, lr=cfg.lr)
        mean_loss = total / n_train
        if not np.isfinite(mean_loss):
            raise NonFiniteLoss(f"epoch {epoch}: loss={mean_loss}")

        top1, top3, precision, recall, f1, mrr = evaluate(
            store, cfg, dataset.val or dataset.train, windows, queries)
        m = EpochMetrics(epoch=epoch, train_loss=mean_loss, top1=top1,
                         top3=top3, precision=precision, recall=recall,
                         f1=f1, mrr=mrr)
        model.history.append(m)
        if top1 > best_top1:
            best_top1 = top1
            best_params = store.copy()

    model.store = best_params
    return model, model.history


def answer(model: KblamModel, graph, features, question: str,
           window_hint: tuple[str, int] | None = None, k: int = 10,
           encoder=None) -> dict:
    """Calibrated top-k answer nodes with attention trace and witness paths.

    The window centers on the hint when given, else on the most
    text-similar node; scores calibrate via softmax over the window. A
    top probability under 0.2 sets the low-confidence flag (the answer is
    still returned).
    """
    cfg = model.config
    if encoder is None:
        from ..featurize.encoder import HashedSubwordEncoder
        encoder = HashedSubwordEncoder()
    qvec = encode_text(encoder, question)
    if window_hint is not None:
        center, hops = window_hint
    else:
        seeds = text_similarity_seeds(features, qvec, k=1)
        center, hops = features.node_ids[seeds[0][0]], cfg.default_hops
    hops = min(hops, cfg.max_hops)

    window = build_window(graph, features, center, hops)
    h, _ = encode_subgraph(model.store, window)
    mask = np.ones(len(window.node_ids), dtype=bool)
    attended, weights, _ = rectangular_attention(model.store, cfg, qvec, h, mask)
    scores, _ = score_nodes(model.store, cfg, attended, h, mask, None)

    shifted = scores - scores.max()
    probs = np.exp(shifted)
    probs /= probs.sum()
    order = np.lexsort((np.asarray(window.node_ids, dtype=object), -probs))
    ranked = [(window.node_ids[i], float(probs[i])) for i in order[:k]]

    trace = AttentionTrace(per_head=weights, averaged=weights.mean(axis=0),
                           node_ids=window.node_ids)

    def witness(nid: str) -> list[str]:
        path = [nid]
        while window.parents.get(path[-1]) is not None:
            path.append(window.parents[path[-1]])
        return list(reversed(path))

    return {
        "question": question,
        "window": {"center": center, "hops": hops,
                   "size": len(window.node_ids)},
        "ranked": ranked,
        "low_confidence": bool(ranked and ranked[0][1] < 0.2),
        "attention": {
            "averaged": {nid: float(w) for nid, w in
                         zip(window.node_ids, trace.averaged)},
            "top_attended": trace.top_attended(5),
        },
        "witness_paths": {nid: witness(nid) for nid, _ in ranked[:3]},
    }
