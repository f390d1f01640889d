"""Typed directed graphs and basic structural operations.

Graphs carry categorical node classes (``a`` of them) and categorical edge
classes (``b`` of them, class 0 meaning "no edge") on every ordered node
pair.  Instances are immutable after construction and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import CyclicGraphError

__all__ = [
    "TypedDigraph",
    "SubgraphInstance",
    "induced_subgraph",
    "is_connected",
    "topological_levels",
]


class TypedDigraph:
    """Directed graph with node classes in [0, a) and edge classes in [0, b).

    ``edge_types[i, j]`` is the class of the ordered pair i -> j; class 0
    means the edge is absent.  Diagonal entries must be 0 (no self-loops).
    """

    __slots__ = ("node_types", "edge_types", "alphabet")

    def __init__(self, node_types, edge_types, alphabet):
        nt = np.ascontiguousarray(node_types, dtype=np.int32)
        et = np.ascontiguousarray(edge_types, dtype=np.int32)
        a, b = int(alphabet[0]), int(alphabet[1])
        if nt.ndim != 1:
            raise ValueError("node_types must be one-dimensional")
        n = nt.shape[0]
        if et.shape != (n, n):
            raise ValueError(f"edge_types must be {n}x{n}, got {et.shape}")
        if a < 1 or b < 1:
            raise ValueError("alphabet sizes must be positive")
        if n > 0:
            if nt.min(initial=0) < 0 or nt.max(initial=0) >= a:
                raise ValueError("node class out of range [0, a)")
            if et.min(initial=0) < 0 or et.max(initial=0) >= b:
                raise ValueError("edge class out of range [0, b)")
            if np.any(np.diagonal(et) != 0):
                raise ValueError("diagonal edge entries must be class 0")
        nt.setflags(write=False)
        et.setflags(write=False)
        object.__setattr__(self, "node_types", nt)
        object.__setattr__(self, "edge_types", et)
        object.__setattr__(self, "alphabet", (a, b))

    def __setattr__(self, name, value):
        raise AttributeError("TypedDigraph is immutable")

    @property
    def num_nodes(self) -> int:
        return self.node_types.shape[0]

    def num_edges(self) -> int:
        """Number of present (class != 0) ordered pairs."""
        return int(np.count_nonzero(self.edge_types))

    def edges(self) -> list[tuple[int, int, int]]:
        """Present edges as (src, dst, class) triples in row-major order."""
        src, dst = np.nonzero(self.edge_types)
        return [
            (int(s), int(d), int(self.edge_types[s, d]))
            for s, d in zip(src, dst)
        ]

    def out_neighbors(self, i: int) -> np.ndarray:
        return np.nonzero(self.edge_types[i])[0]

    def in_neighbors(self, i: int) -> np.ndarray:
        return np.nonzero(self.edge_types[:, i])[0]

    def undirected_neighbors(self, i: int) -> np.ndarray:
        """Nodes adjacent to i ignoring direction."""
        mask = (self.edge_types[i] != 0) | (self.edge_types[:, i] != 0)
        return np.nonzero(mask)[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, TypedDigraph):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and np.array_equal(self.node_types, other.node_types)
            and np.array_equal(self.edge_types, other.edge_types)
        )

    def __hash__(self):
        return hash(
            (self.alphabet, self.node_types.tobytes(), self.edge_types.tobytes())
        )

    def __repr__(self) -> str:
        return (
            f"TypedDigraph(n={self.num_nodes}, edges={self.num_edges()}, "
            f"alphabet={self.alphabet})"
        )


@dataclass(frozen=True, order=True)
class SubgraphInstance:
    """One induced occurrence: a graph id and a sorted tuple of node ids."""

    graph_id: str
    nodes: tuple[int, ...]

    def __post_init__(self):
        nodes = tuple(sorted(int(v) for v in self.nodes))
        if len(set(nodes)) != len(nodes):
            raise ValueError("instance node ids must be distinct")
        object.__setattr__(self, "nodes", nodes)


def induced_subgraph(graph: TypedDigraph, nodes: Sequence[int]) -> TypedDigraph:
    """Induced subgraph on ``nodes``, in the given order.

    Node p of the result is ``nodes[p]`` of the input; every edge of the
    input between selected nodes is retained.
    """
    idx = np.asarray(list(nodes), dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("nodes must be a flat id sequence")
    n = graph.num_nodes
    if idx.size > 0 and (idx.min() < 0 or idx.max() >= n):
        raise ValueError("node id out of range")
    if len(set(idx.tolist())) != idx.size:
        raise ValueError("duplicate node id")
    nt = graph.node_types[idx]
    et = graph.edge_types[np.ix_(idx, idx)]
    return TypedDigraph(nt, et, graph.alphabet)


def is_connected(graph: TypedDigraph) -> bool:
    """True iff the undirected skeleton is a single component.

    Graphs with 0 or 1 nodes count as connected.
    """
    n = graph.num_nodes
    if n <= 1:
        return True
    present = (graph.edge_types != 0) | (graph.edge_types.T != 0)
    seen = np.zeros(n, dtype=bool)
    stack = [0]
    seen[0] = True
    while stack:
        v = stack.pop()
        for u in np.nonzero(present[v])[0]:
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return bool(seen.all())


def topological_levels(graph: TypedDigraph) -> list[int]:
    """Longest-path level of each node: sources 0, else 1 + max over in-neighbors.

    Raises CyclicGraphError if the graph has a directed cycle.
    """
    n = graph.num_nodes
    et = graph.edge_types
    indeg = np.count_nonzero(et, axis=0)
    levels = [0] * n
    queue = [v for v in range(n) if indeg[v] == 0]
    remaining = indeg.copy()
    processed = 0
    while queue:
        v = queue.pop()
        processed += 1
        for u in np.nonzero(et[v])[0]:
            u = int(u)
            levels[u] = max(levels[u], levels[v] + 1)
            remaining[u] -= 1
            if remaining[u] == 0:
                queue.append(u)
    if processed != n:
        raise CyclicGraphError("graph contains a directed cycle")
    return levels


def acyclic_levels(graph: TypedDigraph) -> list[int]:
    """Levels for arbitrary directed graphs.

    DAGs get their exact levels.  If a cycle is present, edges are re-added
    in ascending (src, dst) id order and any edge that would close a cycle
    is dropped; levels are computed on the surviving acyclic subgraph.
    """
    try:
        return topological_levels(graph)
    except CyclicGraphError:
        pass
    n = graph.num_nodes
    kept = np.zeros((n, n), dtype=bool)
    reach = np.eye(n, dtype=bool)  # reach[i, j]: j reachable from i via kept edges
    for i, j in zip(*np.nonzero(graph.edge_types)):
        i, j = int(i), int(j)
        if reach[j, i]:
            continue  # i -> j would close a cycle
        kept[i, j] = True
        # every node reaching i now also reaches everything j reaches
        sources = np.nonzero(reach[:, i])[0]
        reach[sources[:, None], np.nonzero(reach[j])[0][None, :]] = True
    levels = [0] * n
    indeg = kept.sum(axis=0)
    queue = [v for v in range(n) if indeg[v] == 0]
    remaining = indeg.copy()
    while queue:
        v = queue.pop()
        for u in np.nonzero(kept[v])[0]:
            u = int(u)
            levels[u] = max(levels[u], levels[v] + 1)
            remaining[u] -= 1
            if remaining[u] == 0:
                queue.append(u)
    return levels
