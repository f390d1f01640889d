"""Small constructors shared across test modules."""

import numpy as np

from motifdiff.graphs import TypedDigraph


def make_graph(node_types, edges, a=None, b=None):
    """Build a TypedDigraph from a node-class list and (src, dst, cls) triples."""
    n = len(node_types)
    if a is None:
        a = max(node_types) + 1 if node_types else 1
    if b is None:
        b = max((e[2] for e in edges), default=0) + 1
        b = max(b, 2) if edges else max(b, 1)
    et = np.zeros((n, n), dtype=np.int32)
    for src, dst, cls in edges:
        et[src, dst] = cls
    return TypedDigraph(np.asarray(node_types, dtype=np.int32), et, (a, b))


def chain(n, node_cls=0, edge_cls=1, a=1, b=2):
    """Path 0 -> 1 -> ... -> n-1 with uniform classes."""
    edges = [(i, i + 1, edge_cls) for i in range(n - 1)]
    return make_graph([node_cls] * n, edges, a=a, b=b)


def permuted(graph, perm):
    """Relabel nodes of ``graph`` by ``perm`` (node i becomes perm[i])."""
    n = graph.num_nodes
    perm = list(perm)
    nt = np.empty(n, dtype=np.int32)
    et = np.zeros((n, n), dtype=np.int32)
    for i in range(n):
        nt[perm[i]] = graph.node_types[i]
    for i in range(n):
        for j in range(n):
            et[perm[i], perm[j]] = graph.edge_types[i, j]
    return TypedDigraph(nt, et, graph.alphabet)
