"""Query-intent routing across the three answer backends."""

from .classify import (FALLBACK_RULES_VERSION, classify_fallback,
                       parse_response, render_prompt)
from .dispatch import RoutedAnswer, dispatch, result_subgraph, route
from .types import (CANONICAL_MAPPING, Backend, LlmClientConfig, QueryType,
                    RoutingDecision)

__all__ = [
    "FALLBACK_RULES_VERSION", "CANONICAL_MAPPING",
    "Backend", "QueryType", "RoutingDecision", "LlmClientConfig",
    "render_prompt", "parse_response", "classify_fallback",
    "route", "dispatch", "RoutedAnswer", "result_subgraph",
]
