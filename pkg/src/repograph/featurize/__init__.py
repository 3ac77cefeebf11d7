"""Hybrid node featurization: numeric code metrics + text embeddings."""

from .encoder import (TEXT_DIM, HashedSubwordEncoder, RemoteEncoder,
                      encode_text, get_encoder)
from .features import (FEATURE_DIM, NUMERIC_DIM, NUMERIC_SLICE, TEXT_SLICE,
                       NodeFeatureMatrix, featurize_nodes, node_text)

__all__ = [
    "TEXT_DIM", "NUMERIC_DIM", "FEATURE_DIM", "NUMERIC_SLICE", "TEXT_SLICE",
    "HashedSubwordEncoder", "RemoteEncoder", "NodeFeatureMatrix",
    "encode_text", "get_encoder", "featurize_nodes", "node_text",
]
