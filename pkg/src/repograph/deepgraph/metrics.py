"""Link-prediction metrics and clustering quality."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyInput


@dataclass
class LinkPredMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float
    average_precision: float
    top3_accuracy: float = 0.0

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy, "precision": self.precision,
            "recall": self.recall, "f1": self.f1, "roc_auc": self.roc_auc,
            "average_precision": self.average_precision,
            "top3_accuracy": self.top3_accuracy,
        }


def _rank_auc(pos: np.ndarray, neg: np.ndarray) -> float:
    """AUC = P(pos > neg) + 0.5 P(tie), via the midrank statistic."""
    scores = np.concatenate([pos, neg])
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores))
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0  # midrank, 1-based
        i = j + 1
    r_pos = ranks[:len(pos)].sum()
    n_pos, n_neg = len(pos), len(neg)
    return float((r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _average_precision(pos: np.ndarray, neg: np.ndarray) -> float:
    """Area under precision-recall by a score-sorted sweep.

    Ties rank negatives before positives, making the sweep deterministic
    and pessimistic.
    """
    scores = np.concatenate([pos, neg])
    labels = np.concatenate([np.ones(len(pos)), np.zeros(len(neg))])
    order = np.lexsort((labels, -scores))  # desc score, negatives first on ties
    hits = 0
    ap = 0.0
    for k, idx in enumerate(order, start=1):
        if labels[idx] == 1.0:
            hits += 1
            ap += hits / k
    return float(ap / len(pos))


def eval_link_prediction(scores_pos, scores_neg,
                         threshold: float = 0.5) -> LinkPredMetrics:
    """Thresholded metrics at ``threshold`` plus rank-based AUC and AP."""
    pos = np.asarray(list(scores_pos), dtype=np.float64)
    neg = np.asarray(list(scores_neg), dtype=np.float64)
    if len(pos) == 0 or len(neg) == 0:
        raise EmptyInput("need at least one positive and one negative score")

    tp = float((pos >= threshold).sum())
    fn = float(len(pos) - tp)
    fp = float((neg >= threshold).sum())
    tn = float(len(neg) - fp)
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return LinkPredMetrics(
        accuracy=(tp + tn) / (len(pos) + len(neg)),
        precision=precision, recall=recall, f1=f1,
        roc_auc=_rank_auc(pos, neg),
        average_precision=_average_precision(pos, neg),
    )


def silhouette_score(embeddings: np.ndarray, labels: list) -> float | None:
    """Mean silhouette over samples with euclidean distance.

    None when fewer than two distinct labels (undefined). Singleton-cluster
    samples contribute 0.
    """
    labels = list(labels)
    distinct = sorted(set(labels))
    if len(distinct) < 2 or len(labels) != len(embeddings):
        return None
    X = np.asarray(embeddings, dtype=np.float64)
    sq = (X * X).sum(axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    dist = np.sqrt(d2)
    label_arr = np.asarray([distinct.index(l) for l in labels])
    total = 0.0
    for i in range(len(labels)):
        own = label_arr == label_arr[i]
        n_own = own.sum()
        if n_own <= 1:
            continue  # singleton: silhouette 0
        a = dist[i][own].sum() / (n_own - 1)
        b = np.inf
        for c in range(len(distinct)):
            if c == label_arr[i]:
                continue
            mask = label_arr == c
            if mask.any():
                b = min(b, dist[i][mask].mean())
        total += (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return float(total / len(labels))
