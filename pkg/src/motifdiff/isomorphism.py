"""Isomorphism testing and induced-occurrence counting.

The backtracking kernels exist twice: a Cython extension (`_motifcore`) and
a pure-Python fallback (`_iso_py`).  The compiled one is picked at import
when available; set MOTIFDIFF_PURE_PYTHON=1 to force the fallback.
"""

from __future__ import annotations

import os
import time

import numpy as np

from . import _iso_py
from .graphs import TypedDigraph

__all__ = ["TIMEOUT", "Timeout", "is_isomorphic", "count_occurrences", "BACKEND"]


def _load_backend():
    if os.environ.get("MOTIFDIFF_PURE_PYTHON", "") not in ("", "0"):
        return _iso_py, "python"
    try:
        from . import _motifcore  # noqa: PLC0415

        return _motifcore, "compiled"
    except ImportError:
        return _iso_py, "python"


_impl, BACKEND = _load_backend()


class Timeout:
    """Sentinel returned by count_occurrences when the cutoff is exceeded."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Timeout"


TIMEOUT = Timeout()


def is_isomorphic(g1: TypedDigraph, g2: TypedDigraph) -> bool:
    """True iff a node bijection preserves every node class and every ordered
    pair's edge class (absence included)."""
    if g1.num_nodes != g2.num_nodes:
        return False
    return bool(
        _impl.isomorphic(g1.node_types, g1.edge_types, g2.node_types, g2.edge_types)
    )


def automorphism_count(g: TypedDigraph) -> int:
    """Number of class-preserving self-mappings (always >= 1)."""
    c = _impl.count_mappings(
        g.node_types, g.edge_types, g.node_types, g.edge_types, float("inf"), False
    )
    return int(c)


def count_occurrences(sub: TypedDigraph, host: TypedDigraph, cutoff: float = float("inf")):
    """Exact number of node subsets of ``host`` inducing a copy of ``sub``.

    Distinct occurrences differ in node set; remappings of the same set do
    not count twice.  ``cutoff`` is a wall-clock budget in seconds; when it
    runs out the TIMEOUT sentinel is returned instead of a count.
    """
    if sub.num_nodes > host.num_nodes:
        return 0
    if sub.num_nodes == 0:
        return 1
    deadline = float("inf") if cutoff == float("inf") else time.monotonic() + cutoff
    aut = _impl.count_mappings(
        sub.node_types, sub.edge_types, sub.node_types, sub.edge_types, deadline, False
    )
    if aut < 0:
        return TIMEOUT
    total = _impl.count_mappings(
        sub.node_types, sub.edge_types, host.node_types, host.edge_types, deadline, False
    )
    if total < 0:
        return TIMEOUT
    # every occurrence set is hit by exactly |Aut(sub)| mappings
    return total // aut
