"""Angelic abstract-plan search for discrete graphs and sampled motion planning."""
from .core import (
    INF,
    Abstraction,
    AbstractState,
    BoundTuple,
    ConfigurationError,
    Operator,
    PlanNode,
    SymbolicValuation,
    decompose,
    dominates,
    join,
    propagate,
    upper_to,
    v_lower,
    v_upper,
)
from .search import SearchConfig, SearchResult, SearchStats, key, search

__all__ = [
    "INF",
    "Abstraction",
    "AbstractState",
    "BoundTuple",
    "ConfigurationError",
    "Operator",
    "PlanNode",
    "SymbolicValuation",
    "SearchConfig",
    "SearchResult",
    "SearchStats",
    "decompose",
    "dominates",
    "join",
    "key",
    "propagate",
    "search",
    "upper_to",
    "v_lower",
    "v_upper",
]
