"""Skip-gram with negative sampling over walk corpora."""

from __future__ import annotations

import numpy as np

from .. import _kernels
from ..errors import EmptyInput, NonFiniteLoss
from .walks import WalkConfig, WalkCorpus

_NOISE_TABLE_SIZE = 1 << 16


def _extract_pairs(corpus: WalkCorpus, window: int) -> tuple[np.ndarray, np.ndarray]:
    centers, contexts = [], []
    for walk in corpus.walks:
        live = walk[walk >= 0]
        n = len(live)
        for i in range(n):
            lo = max(0, i - window)
            hi = min(n, i + window + 1)
            for j in range(lo, hi):
                if j != i:
                    centers.append(live[i])
                    contexts.append(live[j])
    return (np.asarray(centers, dtype=np.int64),
            np.asarray(contexts, dtype=np.int64))


def _noise_table(counts: np.ndarray) -> np.ndarray:
    """Unigram^0.75 sampling table (word2vec convention)."""
    weights = np.power(np.maximum(counts, 0.0), 0.75)
    total = weights.sum()
    if total == 0:
        raise EmptyInput("corpus has no tokens")
    shares = np.floor(weights / total * _NOISE_TABLE_SIZE).astype(np.int64)
    shares[weights > 0] = np.maximum(shares[weights > 0], 1)
    table = np.repeat(np.arange(len(counts), dtype=np.int64), shares)
    return table


def train_skipgram(corpus: WalkCorpus, config: WalkConfig | None = None
                   ) -> tuple[np.ndarray, list[float]]:
    """L2-normalized structural embeddings plus the per-epoch loss trace.

    The learning rate decays linearly per epoch; updates stream pairs in
    corpus order, matching the compiled and fallback kernels exactly.
    """
    cfg = config or corpus.config or WalkConfig()
    n = len(corpus.node_ids)
    if n == 0:
        raise EmptyInput("empty corpus")
    rng = np.random.default_rng(cfg.seed)
    w_in = (rng.random((n, cfg.embedding_dim)) - 0.5) / cfg.embedding_dim
    w_out = np.zeros((n, cfg.embedding_dim))

    centers, contexts = _extract_pairs(corpus, cfg.window)
    losses: list[float] = []
    if len(centers) == 0:
        # single-node or fully isolated graphs produce no co-occurrence pairs
        return _normalize(w_in), losses

    noise = _noise_table(corpus.token_counts())
    for epoch in range(cfg.epochs):
        frac = epoch / cfg.epochs
        lr = max(cfg.lr_min, cfg.lr * (1.0 - frac))
        loss = _kernels.sgns_epoch(centers, contexts, w_in, w_out, noise,
                                   cfg.negatives_per_positive, lr,
                                   seed=(cfg.seed * 2654435761 + epoch + 1))
        if not np.isfinite(loss):
            raise NonFiniteLoss(f"epoch {epoch}: loss={loss}")
        losses.append(float(loss))
    return _normalize(w_in), losses


def _normalize(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, norms, out=np.zeros_like(m), where=norms > 0)
