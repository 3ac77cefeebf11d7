"""Link-prediction learning and deterministic multi-hop traversal."""

from .answer import answer_single_hop
from .arrays import GraphArrays, from_graph
from .gae import GaeConfig, GaeModel, train_gae
from .han import HanConfig, HanModel, train_han
from .metrics import LinkPredMetrics, eval_link_prediction, silhouette_score
from .sage import SageConfig, SageModel, train_sage_supervised
from .split import EdgeSplit, split_edges
from .traverse import (PathPattern, PathStep, compile_query, traverse_path,
                       validate_pattern)

__all__ = [
    "GraphArrays", "from_graph",
    "EdgeSplit", "split_edges",
    "LinkPredMetrics", "eval_link_prediction", "silhouette_score",
    "SageConfig", "SageModel", "train_sage_supervised",
    "GaeConfig", "GaeModel", "train_gae",
    "HanConfig", "HanModel", "train_han",
    "PathPattern", "PathStep", "compile_query", "traverse_path",
    "validate_pattern", "answer_single_hop",
]
