"""Frequent-subgraph (motif) discovery in typed DAG sets, guided by a
discrete-state diffusion estimate of pattern probability."""

from .graphs import (
    SubgraphInstance,
    TypedDigraph,
    induced_subgraph,
    is_connected,
    topological_levels,
)
from .isomorphism import TIMEOUT, count_occurrences, is_isomorphic
from .patterns import Pattern, PatternKey, canonicalize, pattern_key

__version__ = "0.1.0"

__all__ = [
    "TypedDigraph",
    "SubgraphInstance",
    "induced_subgraph",
    "is_connected",
    "topological_levels",
    "is_isomorphic",
    "count_occurrences",
    "TIMEOUT",
    "Pattern",
    "PatternKey",
    "pattern_key",
    "canonicalize",
    "__version__",
]
