"""Walk-based structural embeddings and the similarity index."""

from .index import EmbeddingIndex, build_index, expand_structural, query_topk
from .sgns import train_skipgram
from .walks import WalkConfig, WalkCorpus, random_walks

__all__ = [
    "WalkConfig", "WalkCorpus", "random_walks", "train_skipgram",
    "EmbeddingIndex", "build_index", "query_topk", "expand_structural",
]
