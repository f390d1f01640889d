"""Isomorphism-class keys via iterated neighborhood refinement.

Keys are permutation-invariant digests: isomorphic graphs always collide,
non-isomorphic ones collide only with digest-level probability.  Exactness
comes from `canonicalize`, which splits a key bucket into true classes with
pairwise isomorphism checks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .graphs import TypedDigraph
from .isomorphism import is_isomorphic

__all__ = ["PatternKey", "Pattern", "pattern_key", "canonicalize"]

DIGEST_SIZE = 16  # bytes


@dataclass(frozen=True, order=True)
class PatternKey:
    """Hash-bucket key for an isomorphism class."""

    digest: bytes

    def hex(self) -> str:
        return self.digest.hex()

    def __repr__(self):
        return f"PatternKey({self.digest.hex()})"


@dataclass(frozen=True)
class Pattern:
    """Class representative graph together with its key."""

    graph: TypedDigraph
    key: PatternKey


def _fold(payload: bytes, digest_size: int) -> bytes:
    return hashlib.blake2b(payload, digest_size=digest_size).digest()


def pattern_key(graph: TypedDigraph, digest_size: int = DIGEST_SIZE) -> PatternKey:
    """Permutation-invariant key from ``num_nodes`` refinement rounds.

    Each round relabels a node by its class plus the sorted multiset of
    (direction, edge class, neighbor label) over present incident edges.
    ``digest_size`` is exposed so tests can force collisions at tiny widths.
    """
    n = graph.num_nodes
    et = graph.edge_types
    labels = [_fold(b"n%d" % int(c), digest_size) for c in graph.node_types]
    incident = []
    for v in range(n):
        pairs = []
        for u in np.nonzero(et[v])[0]:
            pairs.append((0, int(et[v, u]), int(u)))  # outgoing
        for u in np.nonzero(et[:, v])[0]:
            pairs.append((1, int(et[u, v]), int(u)))  # incoming
        incident.append(pairs)
    for _ in range(n):
        new_labels = []
        for v in range(n):
            parts = sorted(
                b"%d:%d:" % (direction, cls) + labels[u]
                for direction, cls, u in incident[v]
            )
            new_labels.append(_fold(labels[v] + b"|" + b",".join(parts), digest_size))
        labels = new_labels
    summary = b";".join(sorted(labels))
    header = b"G%d,%d,%d#" % (n, graph.alphabet[0], graph.alphabet[1])
    return PatternKey(_fold(header + summary, digest_size))


def canonicalize(
    bucket: list[TypedDigraph],
) -> list[tuple[Pattern, list[int]]]:
    """Split one hash bucket into exact isomorphism classes.

    All members must share a key.  Returns (representative pattern, member
    indices) per class; the first member seen becomes the representative.
    """
    classes: list[tuple[Pattern, list[int]]] = []
    for idx, g in enumerate(bucket):
        placed = False
        for pat, members in classes:
            if is_isomorphic(g, pat.graph):
                members.append(idx)
                placed = True
                break
        if not placed:
            classes.append((Pattern(g, pattern_key(g)), [idx]))
    return classes
