"""Graph-set ingestion, serialization, marginals, and synthetic generation.

File format: newline-delimited JSON, UTF-8, LF.  The first record is a
manifest declaring the alphabet; each following record is one graph with
0-based node ids and explicit present edges (type >= 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from .graphs import TypedDigraph, topological_levels
from .patterns import Pattern

__all__ = [
    "GraphSet",
    "Marginals",
    "SynthSpec",
    "load_graph_set",
    "save_graph_set",
    "compute_marginals",
    "synth_generate",
]


@dataclass
class GraphSet:
    """Immutable-by-convention list of graphs sharing one alphabet."""

    graphs: list[TypedDigraph]
    ids: list[str]
    alphabet: tuple[int, int]
    name: str = ""
    node_classes: list[str] | None = None
    edge_classes: list[str] | None = None

    def __post_init__(self):
        if len(self.graphs) != len(self.ids):
            raise ValidationError("graphs and ids differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValidationError("graph ids must be unique")
        for gid, g in zip(self.ids, self.graphs):
            if g.alphabet != tuple(self.alphabet):
                raise ValidationError(f"graph {gid!r} alphabet {g.alphabet} "
                                      f"differs from set alphabet {self.alphabet}")

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def graph_by_id(self, gid: str) -> TypedDigraph:
        return self.graphs[self.ids.index(gid)]


@dataclass
class Marginals:
    """Empirical class distributions over nodes and ordered off-diagonal pairs."""

    node_marginal: np.ndarray
    edge_marginal: np.ndarray

    def __post_init__(self):
        self.node_marginal = np.asarray(self.node_marginal, dtype=np.float64)
        self.edge_marginal = np.asarray(self.edge_marginal, dtype=np.float64)
        for name, vec in (("node", self.node_marginal), ("edge", self.edge_marginal)):
            if np.any(vec < 0) or abs(vec.sum() - 1.0) > 1e-9:
                raise ValidationError(f"{name} marginal is not a distribution")


@dataclass
class SynthSpec:
    """Recipe for a synthetic DAG set with planted motifs.

    Each motif is inserted per graph with its own probability (``rate``); the
    planted copy keeps its exact induced structure and is tied to the host
    by a single incoming bridge edge.
    """

    num_graphs: int
    nodes_min: int
    nodes_max: int
    alphabet: tuple[int, int]
    planted: list[tuple[Pattern, float]] = field(default_factory=list)
    density: float = 0.25
    seed: int = 0
    name: str = "synthetic"

    def __post_init__(self):
        if self.nodes_min < 1 or self.nodes_max < self.nodes_min:
            raise ValidationError("bad nodes_per_graph range")
        for pat, rate in self.planted:
            if not 0.0 <= rate <= 1.0:
                raise ValidationError("insertion rate must be in [0, 1]")
            topological_levels(pat.graph)  # raises CyclicGraphError if cyclic
        total_motif = sum(p.graph.num_nodes for p, _ in self.planted)
        if self.planted and total_motif + 1 > self.nodes_max:
            raise ValidationError(
                f"planted motifs need {total_motif} nodes plus one background "
                f"host, but graphs have at most {self.nodes_max} nodes")


def save_graph_set(graph_set: GraphSet, path) -> None:
    a, b = graph_set.alphabet
    manifest = {
        "a": a,
        "b": b,
        "node_classes": graph_set.node_classes or [f"n{i}" for i in range(a)],
        "edge_classes": graph_set.edge_classes or [f"e{i}" for i in range(b)],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest) + "\n")
        for gid, g in zip(graph_set.ids, graph_set.graphs):
            record = {
                "id": gid,
                "n": g.num_nodes,
                "node_types": g.node_types.tolist(),
                "edges": [[s, d, c] for s, d, c in g.edges()],
            }
            fh.write(json.dumps(record) + "\n")


def load_graph_set(path, name: str = "") -> GraphSet:
    graphs: list[TypedDigraph] = []
    ids: list[str] = []
    manifest = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            if manifest is None:
                for key in ("a", "b", "node_classes", "edge_classes"):
                    if key not in record:
                        raise ParseError(line_no, f"manifest missing {key!r}")
                manifest = record
                continue
            graphs.append(_parse_graph_record(record, manifest, line_no))
            ids.append(str(record["id"]))
    if manifest is None:
        raise ParseError(0, "file has no manifest record")
    return GraphSet(
        graphs=graphs,
        ids=ids,
        alphabet=(int(manifest["a"]), int(manifest["b"])),
        name=name or str(path),
        node_classes=list(manifest["node_classes"]),
        edge_classes=list(manifest["edge_classes"]),
    )


def _parse_graph_record(record, manifest, line_no) -> TypedDigraph:
    a, b = int(manifest["a"]), int(manifest["b"])
    for key in ("id", "n", "node_types", "edges"):
        if key not in record:
            raise ParseError(line_no, f"graph record missing {key!r}")
    n = int(record["n"])
    node_types = record["node_types"]
    if len(node_types) != n:
        raise ParseError(line_no, f"record {record['id']!r}: node_types length "
                                  f"{len(node_types)} != n={n}")
    for c in node_types:
        if not 0 <= int(c) < a:
            raise ValidationError(
                f"record {record['id']!r} (line {line_no}): node class {c} "
                f"outside alphabet [0, {a})")
    et = np.zeros((n, n), dtype=np.int32)
    for edge in record["edges"]:
        src, dst, cls = (int(x) for x in edge)
        if not (0 <= src < n and 0 <= dst < n) or src == dst:
            raise ValidationError(
                f"record {record['id']!r} (line {line_no}): bad edge "
                f"({src}, {dst})")
        if not 1 <= cls < b:
            raise ValidationError(
                f"record {record['id']!r} (line {line_no}): edge class {cls} "
                f"outside alphabet [1, {b})")
        et[src, dst] = cls
    return TypedDigraph(np.asarray(node_types, dtype=np.int32), et, (a, b))


def compute_marginals(graphs: list[TypedDigraph]) -> Marginals:
    """Class fractions over all nodes and all ordered off-diagonal pairs."""
    if not graphs:
        raise ValidationError("cannot compute marginals of an empty set")
    a, b = graphs[0].alphabet
    node_counts = np.zeros(a, dtype=np.int64)
    edge_counts = np.zeros(b, dtype=np.int64)
    for g in graphs:
        node_counts += np.bincount(g.node_types, minlength=a)
        n = g.num_nodes
        counts = np.bincount(g.edge_types.ravel(), minlength=b).astype(np.int64)
        counts[0] -= n  # diagonal slots are not pairs
        edge_counts += counts
    node_marginal = node_counts / node_counts.sum()
    total_pairs = edge_counts.sum()
    if total_pairs == 0:
        edge_marginal = np.zeros(b)
        edge_marginal[0] = 1.0
    else:
        edge_marginal = edge_counts / total_pairs
    return Marginals(node_marginal, edge_marginal)


def synth_generate(spec: SynthSpec) -> GraphSet:
    """Generate a seed-deterministic DAG set with planted motif occurrences.

    Background nodes are wired in topological id order (each non-root gets
    one guaranteed incoming edge, extras at ``density``); planted motifs are
    appended on fresh ids with their exact internal edges plus one random
    host -> motif bridge edge, which keeps the host connected and acyclic
    without touching the motif's induced structure.
    """
    rng = np.random.default_rng(spec.seed)
    a, b = spec.alphabet
    graphs = []
    ids = []
    for g_idx in range(spec.num_graphs):
        chosen = [pat for pat, rate in spec.planted if rng.random() < rate]
        motif_nodes = sum(p.graph.num_nodes for p in chosen)
        # hosts keep at least one background node for the bridges
        lo = max(spec.nodes_min, motif_nodes + 1)
        hi = max(spec.nodes_max, lo)
        n_total = int(rng.integers(lo, hi + 1))
        n_bg = n_total - motif_nodes

        nt = np.empty(n_total, dtype=np.int32)
        et = np.zeros((n_total, n_total), dtype=np.int32)
        nt[:n_bg] = rng.integers(0, a, size=n_bg)
        for j in range(1, n_bg):
            for i in range(j):
                if rng.random() < spec.density:
                    et[i, j] = rng.integers(1, b) if b > 1 else 0
            if b > 1 and not np.any(et[:j, j]):
                et[int(rng.integers(0, j)), j] = int(rng.integers(1, b))

        offset = n_bg
        for pat in chosen:
            m = pat.graph.num_nodes
            sl = slice(offset, offset + m)
            nt[sl] = pat.graph.node_types
            et[sl, sl] = pat.graph.edge_types
            if b > 1 and n_bg > 0:
                host = int(rng.integers(0, n_bg))
                entry = offset + int(rng.integers(0, m))
                et[host, entry] = int(rng.integers(1, b))
            offset += m

        graphs.append(TypedDigraph(nt, et, (a, b)))
        ids.append(f"g{g_idx:05d}")
    return GraphSet(graphs=graphs, ids=ids, alphabet=(a, b), name=spec.name)
