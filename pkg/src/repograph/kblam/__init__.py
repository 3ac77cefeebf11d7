"""Multi-hop QA over repository subgraphs with rectangular attention."""

from .dataset import (QaDataset, QaSample, TemplateConfig, expand_window,
                      generate_dataset, load_dataset, save_dataset)
from .model import (AttentionTrace, BatchedSubgraphs, KblamConfig, Window,
                    build_window, encode_subgraph, rectangular_attention,
                    score_nodes)
from .train import EpochMetrics, KblamModel, answer, train_kblam

__all__ = [
    "QaDataset", "QaSample", "TemplateConfig", "expand_window",
    "generate_dataset", "load_dataset", "save_dataset",
    "AttentionTrace", "BatchedSubgraphs", "KblamConfig", "Window",
    "build_window", "encode_subgraph", "rectangular_attention", "score_nodes",
    "EpochMetrics", "KblamModel", "answer", "train_kblam",
]
