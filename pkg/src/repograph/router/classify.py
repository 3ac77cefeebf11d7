"""Prompt rendering, LLM-response parsing, and the deterministic rule fallback."""

from __future__ import annotations

import re
from importlib import resources

from ..errors import EmptyQuery, RouterParseError
from .types import CANONICAL_MAPPING, Backend, QueryType, RoutingDecision

FALLBACK_RULES_VERSION = 1

_PROMPT = resources.files("repograph.router").joinpath("router_prompt.txt") \
    .read_text("utf-8")


def render_prompt(query: str) -> str:
    """The router prompt with the user query substituted, byte-stable."""
    if not query.strip():
        raise EmptyQuery("query must be non-empty")
    return _PROMPT.replace("{user_query}", query)


_TYPE_LINE = re.compile(r"query\s*type\s*:\s*([A-Za-z \-_/]+)", re.IGNORECASE)
_APPROACH_LINE = re.compile(r"recommended\s*approach\s*:\s*([A-Za-z]+)",
                            re.IGNORECASE)
_REASON_LINE = re.compile(r"reason\s*:\s*(.+)", re.IGNORECASE)

_TYPE_LOOKUP = {
    "singlehop": QueryType.SINGLE_HOP,
    "multihop": QueryType.MULTI_HOP,
    "aggregation": QueryType.AGGREGATION,
    "semantic": QueryType.SEMANTIC,
    "complex": QueryType.COMPLEX,
}
_BACKEND_LOOKUP = {
    "kblam": Backend.KBLAM,
    "deepgraph": Backend.DEEPGRAPH,
    "embedding": Backend.EMBEDDING,
    "embeddings": Backend.EMBEDDING,
}


def parse_response(text: str) -> RoutingDecision:
    """Extract the three labeled lines, tolerating surrounding prose.

    Hyphen/space/underscore variants normalize ("Multi-hop" == "multi hop").
    A backend off the canonical mapping is corrected and flagged.
    """
    type_match = _TYPE_LINE.search(text or "")
    approach_match = _APPROACH_LINE.search(text or "")
    if not type_match or not approach_match:
        raise RouterParseError("missing 'Query Type:' or 'Recommended Approach:'")

    type_key = re.sub(r"[\s\-_/]+", "", type_match.group(1)).lower()
    qtype = None
    for key, value in _TYPE_LOOKUP.items():
        if type_key.startswith(key):
            qtype = value
            break
    backend = _BACKEND_LOOKUP.get(approach_match.group(1).lower())
    if qtype is None or backend is None:
        raise RouterParseError(
            f"unrecognized labels: type={type_match.group(1)!r} "
            f"approach={approach_match.group(1)!r}")

    reason_match = _REASON_LINE.search(text)
    reason = reason_match.group(1).strip() if reason_match else ""
    expected = CANONICAL_MAPPING[qtype]
    corrected = backend != expected
    return RoutingDecision(query_type=qtype, backend=expected, reason=reason,
                           source="llm", raw_response=text,
                           corrected=corrected)


# --- fallback rules (ordered; see classify_fallback docstring) ---------------

_AGGREGATION_CUES = re.compile(
    r"\b(most|count|how many|frequently|often|highest|largest|biggest|"
    r"top|maximum|max)\b", re.IGNORECASE)

_ENTITY_NOUNS = {
    "pr": re.compile(r"\b(prs?|pull requests?)\b", re.IGNORECASE),
    "commit": re.compile(r"\bcommits?\b", re.IGNORECASE),
    "file": re.compile(r"\bfiles?\b", re.IGNORECASE),
    "function": re.compile(r"\b(functions?|methods?)\b", re.IGNORECASE),
    "author": re.compile(r"\b(authors?|developers?|users?|contributors?)\b",
                         re.IGNORECASE),
}

_RELATIONAL_VERBS = re.compile(
    r"\b(authored|wrote|modif\w+|changed|touch\w+|includ\w+|contain\w+|"
    r"call\w*|opened|merged|closed|imports?|depends?|linked|defined)\b",
    re.IGNORECASE)

_ATTRIBUTE_WORDS = re.compile(
    r"\b(status|state|author|title|message|date|body|complexity)\b",
    re.IGNORECASE)

_EXACT_ID = re.compile(
    r"(\#\d+)"                                    # PR/issue number
    r"|(\b(?=[0-9a-f]*\d)[0-9a-f]{6,40}\b)"       # sha-like (needs a digit)
    r"|([\"'`][\w./:\- ]+[\"'`])",                # quoted identifier
    re.IGNORECASE)

_SEMANTIC_CUES = re.compile(
    r"\b(errors?|bugs?|buggy|broken|crash\w*|fail\w*|issues?|problems?|"
    r"slow|flaky|weird|strange|getting|something|about|related to|"
    r"deals with|where is|how do i|feels?)\b", re.IGNORECASE)


def classify_fallback(query: str) -> RoutingDecision:
    """Deterministic intent rules, applied in order (version 1):

    1. aggregation cues (most / count / how many / frequently / superlatives)
    2. two or more distinct entity-type nouns plus a relational verb
    3. an exact-id cue (sha-like, #N, quoted identifier) with one relation
       or attribute word
    4. error/description phrasing with no entity-type noun
    5. everything else is Complex
    """
    if not query.strip():
        raise EmptyQuery("query must be non-empty")

    def decide(qtype: QueryType, reason: str) -> RoutingDecision:
        return RoutingDecision(query_type=qtype,
                               backend=CANONICAL_MAPPING[qtype],
                               reason=reason, source="fallback")

    if _AGGREGATION_CUES.search(query):
        return decide(QueryType.AGGREGATION,
                      "aggregation cue (count/most/frequency)")

    entity_kinds = [k for k, rx in _ENTITY_NOUNS.items() if rx.search(query)]
    has_relation = bool(_RELATIONAL_VERBS.search(query))
    if len(entity_kinds) >= 2 and has_relation:
        return decide(QueryType.MULTI_HOP,
                      f"entities {entity_kinds} joined by a relation")

    if _EXACT_ID.search(query) and (has_relation or
                                    _ATTRIBUTE_WORDS.search(query)):
        return decide(QueryType.SINGLE_HOP,
                      "exact identifier with a direct relation")

    if _SEMANTIC_CUES.search(query) and not entity_kinds:
        return decide(QueryType.SEMANTIC,
                      "descriptive/fuzzy phrasing without graph entities")

    return decide(QueryType.COMPLEX, "no specific cue matched")
