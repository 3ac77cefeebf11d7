"""Routing vocabulary: query types, backends, and the canonical mapping."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class QueryType(str, Enum):
    SINGLE_HOP = "Single-hop"
    MULTI_HOP = "Multi-hop"
    AGGREGATION = "Aggregation"
    SEMANTIC = "Semantic"
    COMPLEX = "Complex"


class Backend(str, Enum):
    KBLAM = "KBLam"
    DEEPGRAPH = "DeepGraph"
    EMBEDDING = "Embedding"


CANONICAL_MAPPING: dict[QueryType, Backend] = {
    QueryType.SINGLE_HOP: Backend.DEEPGRAPH,
    QueryType.MULTI_HOP: Backend.KBLAM,
    QueryType.AGGREGATION: Backend.KBLAM,
    QueryType.SEMANTIC: Backend.EMBEDDING,
    QueryType.COMPLEX: Backend.KBLAM,
}


@dataclass
class RoutingDecision:
    query_type: QueryType
    backend: Backend
    reason: str
    source: str                      # "llm" | "fallback" | "override"
    raw_response: str | None = None
    corrected: bool = False          # LLM picked an off-mapping backend

    def as_dict(self) -> dict:
        return {
            "query_type": self.query_type.value,
            "backend": self.backend.value,
            "reason": self.reason,
            "source": self.source,
            "raw_response": self.raw_response,
            "corrected": self.corrected,
        }


@dataclass
class LlmClientConfig:
    endpoint: str | None = None
    model: str = "router-7b"
    timeout_s: float = 30.0
    max_retries: int = 1
