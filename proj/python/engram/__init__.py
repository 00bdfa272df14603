"""Typed conversational memory with cited retrieval."""

from ._engram import (
    CitationReport,
    DialogueTurn,
    EngramError,
    EvidenceBundle,
    FactCard,
    FactCardSet,
    MemoryStore,
    MemoryType,
    MockEncoder,
    Prompt,
    RouteDecision,
    ScoredCandidate,
    TypedRecord,
    build_prompt,
    check_answer,
    estimate_tokens,
    extract,
    ingest_file,
    render_cards,
    retrieve,
    route,
)

__all__ = [
    "CitationReport",
    "DialogueTurn",
    "EngramError",
    "EvidenceBundle",
    "FactCard",
    "FactCardSet",
    "MemoryStore",
    "MemoryType",
    "MockEncoder",
    "Prompt",
    "RouteDecision",
    "ScoredCandidate",
    "TypedRecord",
    "build_prompt",
    "check_answer",
    "estimate_tokens",
    "extract",
    "ingest_file",
    "render_cards",
    "retrieve",
    "route",
]
