"""Loading and hot-swapping the engine artifacts behind the API."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

from ..config import EnginePaths
from ..deepgraph import SageModel
from ..errors import ArtifactMissing
from ..featurize import NodeFeatureMatrix, featurize_nodes, get_encoder
from ..kblam import KblamModel
from ..kgraph import KnowledgeGraph, import_json


@dataclass
class Engines:
    graph: KnowledgeGraph
    features: NodeFeatureMatrix
    encoder: object
    sage_model: SageModel | None = None
    kblam_model: KblamModel | None = None
    embed_index: object | None = None


class EngineRegistry:
    """Holds the current Engines; readers get a consistent snapshot."""

    def __init__(self, engines: Engines):
        self._lock = threading.Lock()
        self._engines = engines

    @property
    def current(self) -> Engines:
        with self._lock:
            return self._engines

    def swap(self, engines: Engines) -> None:
        with self._lock:
            self._engines = engines


def load_engines(paths: EnginePaths) -> Engines:
    """Load everything named in the config; the graph is mandatory."""
    if not paths.graph:
        raise ArtifactMissing("engines.graph is not configured")
    if not Path(paths.graph).exists():
        raise ArtifactMissing(f"graph file not found: {paths.graph}")
    graph = import_json(paths.graph)

    encoder = get_encoder(paths.encoder_endpoint)
    if paths.features and Path(paths.features).exists():
        features = NodeFeatureMatrix.load(paths.features)
        if features.node_ids != list(graph.nodes):
            features = featurize_nodes(graph, encoder)
    else:
        features = featurize_nodes(graph, encoder)

    sage = None
    if paths.sage:
        if not Path(paths.sage).exists():
            raise ArtifactMissing(f"sage checkpoint not found: {paths.sage}")
        sage = SageModel.load(paths.sage)
    kblam = None
    if paths.kblam:
        if not Path(paths.kblam).exists():
            raise ArtifactMissing(f"kblam checkpoint not found: {paths.kblam}")
        kblam = KblamModel.load(paths.kblam)
    index = None
    if paths.index:
        from ..embed import EmbeddingIndex

        if not Path(paths.index).exists():
            raise ArtifactMissing(f"embedding index not found: {paths.index}")
        index = EmbeddingIndex.load(paths.index)

    return Engines(graph=graph, features=features, encoder=encoder,
                   sage_model=sage, kblam_model=kblam, embed_index=index)
