"""HTTP service, engine registry, and episodic memory."""

from .app import create_app, serve
from .engines import EngineRegistry, Engines, load_engines
from .memory import (EpisodicRecord, EpisodicStore, FeedbackConflict,
                     UnknownRecord)

__all__ = [
    "create_app", "serve", "EngineRegistry", "Engines", "load_engines",
    "EpisodicRecord", "EpisodicStore", "FeedbackConflict", "UnknownRecord",
]
