"""Single-hop answering: text-similar seeds, 1-hop candidates, decoder ranking."""

from __future__ import annotations

import numpy as np

from ..featurize.encoder import encode_text
from ..numkernel import sigmoid
from .arrays import from_graph
from .sage import SageModel
from .traverse import text_similarity_seeds


def answer_single_hop(graph, model: SageModel, query_text: str, encoder,
                      features, k: int = 10) -> list[dict]:
    """Rank 1-hop neighbors of the query's text-similar seed nodes.

    Candidates get the decoder score of their best adjacent seed; ties
    break by node id. Each result carries the seed edge as its trace.
    """
    arr = from_graph(graph)
    qvec = encode_text(encoder, query_text)
    seeds = text_similarity_seeds(features, qvec, k=5)
    z = model.embed(features, arrays=arr)

    best: dict[int, tuple[float, int]] = {}
    for seed_idx, _ in seeds:
        seed_id = arr.node_ids[seed_idx]
        for nb_id in graph.undirected_neighbors(seed_id):
            cand = arr.index[nb_id]
            score = float(sigmoid(np.asarray([z[seed_idx] @ z[cand]]))[0])
            cur = best.get(cand)
            if cur is None or score > cur[0] or \
                    (score == cur[0] and seed_idx < cur[1]):
                best[cand] = (score, seed_idx)

    ranked = sorted(best.items(),
                    key=lambda kv: (-kv[1][0], arr.node_ids[kv[0]]))
    out = []
    for cand, (score, seed_idx) in ranked[:k]:
        out.append({
            "node_id": arr.node_ids[cand],
            "score": score,
            "seed_id": arr.node_ids[seed_idx],
            "trace": [arr.node_ids[seed_idx], arr.node_ids[cand]],
        })
    return out
