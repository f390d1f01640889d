"""Connected k-subgraph samplers and the exact enumeration oracle.

Four samplers with one shared contract (every returned instance induces a
connected k-node subgraph) plus exhaustive ESU enumeration for ground
truth.  All randomness flows through one numpy Generator per call, so a
(graph set, config, seed) triple pins the output exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import GraphSet
from .errors import StallError, ValidationError
from .graphs import SubgraphInstance, TypedDigraph, induced_subgraph, is_connected
from .patterns import Pattern, PatternKey, canonicalize, pattern_key

__all__ = [
    "SampleConfig",
    "SampleResult",
    "SampleStats",
    "depth_probs",
    "ars_sample",
    "nrs_sample",
    "rand_esu_sample",
    "rand_fase_sample",
    "enumerate_k_subgraphs",
    "sample",
    "weighted_pattern_totals",
]

METHODS = ("ars", "nrs", "rand_esu", "rand_fase", "exact_esu")

# draws per requested instance before a sampler declares itself stalled
ATTEMPT_BUDGET_FACTOR = 10_000
MAX_PASSES = 10_000


@dataclass
class SampleConfig:
    method: str
    k: int
    tc: int = 1
    r: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValidationError(f"unknown sampling method {self.method!r}")
        if self.k < 2:
            raise ValidationError("subgraph size k must be >= 2")
        if self.tc < 1 and self.method != "exact_esu":
            raise ValidationError("target count tc must be >= 1")
        if self.r < 0:
            raise ValidationError("depth exponent r must be >= 0")


@dataclass
class SampleStats:
    draws: int = 0
    rejections: int = 0
    passes: int = 0
    wall_time: float = 0.0


@dataclass
class SampleResult:
    instances: list[SubgraphInstance]
    weights: np.ndarray | None = None
    stats: SampleStats = field(default_factory=SampleStats)


def depth_probs(k: int, r: float) -> list[float]:
    """Traversal-continuation probability at each depth d = 1..k."""
    return [(1.0 - d / (k + 1.0)) ** r for d in range(1, k + 1)]


def _undirected_adjacency(graph: TypedDigraph) -> list[set[int]]:
    present = (graph.edge_types != 0) | (graph.edge_types.T != 0)
    return [set(np.nonzero(present[v])[0].tolist()) for v in range(graph.num_nodes)]


def _edge_weights(graph_set: GraphSet) -> np.ndarray:
    counts = np.array([g.num_edges() for g in graph_set.graphs], dtype=np.float64)
    return counts


def _present_edges(graph: TypedDigraph) -> list[tuple[int, int]]:
    src, dst = np.nonzero(graph.edge_types)
    return list(zip(src.tolist(), dst.tolist()))


# ---------------------------------------------------------------------------
# acceptance-rejection sampling


def ars_sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Pick a graph proportional to edge count, pick k random nodes, keep
    connected draws until tc instances are collected."""
    rng = np.random.default_rng(cfg.seed)
    start = time.monotonic()
    weights = _edge_weights(graph_set)
    if weights.sum() == 0:
        raise StallError("no graph has any edges to weight the selection")
    probs = weights / weights.sum()
    stats = SampleStats()
    instances: list[SubgraphInstance] = []
    budget = ATTEMPT_BUDGET_FACTOR * cfg.tc
    while len(instances) < cfg.tc:
        if stats.draws >= budget:
            raise StallError(
                f"ars drew {stats.draws} times for {len(instances)}/{cfg.tc} "
                f"instances")
        stats.draws += 1
        idx = int(rng.choice(len(graph_set.graphs), p=probs))
        g = graph_set.graphs[idx]
        if g.num_nodes < cfg.k:
            stats.rejections += 1
            continue
        nodes = rng.choice(g.num_nodes, size=cfg.k, replace=False)
        nodes = sorted(int(v) for v in nodes)
        if is_connected(induced_subgraph(g, nodes)):
            instances.append(SubgraphInstance(graph_set.ids[idx], tuple(nodes)))
        else:
            stats.rejections += 1
    stats.wall_time = time.monotonic() - start
    return SampleResult(instances, None, stats)


# ---------------------------------------------------------------------------
# neighbor reservoir sampling


def _nrs_single(graph: TypedDigraph, k: int, rng) -> tuple[int, ...] | None:
    """One NRS draw on one graph; None when the start component is too small."""
    edges = _present_edges(graph)
    if not edges:
        return None
    x, y = edges[int(rng.integers(0, len(edges)))]
    nodes = {x, y}
    while len(nodes) < k:
        cut = [
            (s, d)
            for s, d in edges
            if (s in nodes) != (d in nodes)
        ]
        if not cut:
            return None
        s, d = cut[int(rng.integers(0, len(cut)))]
        nodes.add(d if s in nodes else s)

    unprocessed = set(range(graph.num_nodes)) - nodes
    i = k
    while True:
        cut = [
            (s, d)
            for s, d in edges
            if (s in nodes and d in unprocessed) or (d in nodes and s in unprocessed)
        ]
        if not cut:
            break
        i += 1
        s, d = cut[int(rng.integers(0, len(cut)))]
        v = d if d in unprocessed else s
        unprocessed.discard(v)
        if rng.random() < k / i:
            u = sorted(nodes)[int(rng.integers(0, len(nodes)))]
            candidate = (nodes - {u}) | {v}
            order = sorted(candidate)
            if is_connected(induced_subgraph(graph, order)):
                nodes = candidate
    return tuple(sorted(nodes))


def nrs_sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Grow from a random edge to size k, then reservoir-swap with
    connectivity-preserving neighbor exchanges."""
    rng = np.random.default_rng(cfg.seed)
    start = time.monotonic()
    weights = _edge_weights(graph_set)
    if weights.sum() == 0:
        raise StallError("no graph has any edges to weight the selection")
    probs = weights / weights.sum()
    stats = SampleStats()
    instances: list[SubgraphInstance] = []
    budget = ATTEMPT_BUDGET_FACTOR * cfg.tc
    while len(instances) < cfg.tc:
        if stats.draws >= budget:
            raise StallError(
                f"nrs drew {stats.draws} times for {len(instances)}/{cfg.tc} "
                f"instances")
        stats.draws += 1
        idx = int(rng.choice(len(graph_set.graphs), p=probs))
        g = graph_set.graphs[idx]
        nodes = _nrs_single(g, cfg.k, rng)
        if nodes is None:
            stats.rejections += 1
            continue
        instances.append(SubgraphInstance(graph_set.ids[idx], nodes))
    stats.wall_time = time.monotonic() - start
    return SampleResult(instances, None, stats)


# ---------------------------------------------------------------------------
# ESU enumeration tree (shared by Rand-ESU, Rand-FaSE, and exact enumeration)


def esu_pass(
    graph: TypedDigraph,
    k: int,
    probs: list[float] | None = None,
    rng=None,
    collect_weights: bool = False,
) -> list[tuple[int, ...]] | list[tuple[tuple[int, ...], float]]:
    """One traversal of the ESU enumeration tree over a single graph.

    With ``probs`` all 1 (or None) this yields every connected induced
    k-subgraph exactly once.  Otherwise each depth-d extension survives with
    probability probs[d-1], so a leaf survives with the product over depths.
    With ``collect_weights`` each emitted leaf carries 1/product, the
    inverse of its survival probability.
    """
    n = graph.num_nodes
    adj = _undirected_adjacency(graph)
    if probs is None:
        probs = [1.0] * k
    deterministic = all(p >= 1.0 for p in probs)
    if not deterministic and rng is None:
        raise ValueError("random depth probabilities need an rng")
    out: list = []

    def emit(v_sub: set[int], q: float):
        leaf = tuple(sorted(v_sub))
        if collect_weights:
            out.append((leaf, 1.0 / q))
        else:
            out.append(leaf)

    def extend(v_sub: set[int], v_ext: set[int], closed: set[int], v: int, q: float):
        if len(v_sub) == k:
            emit(v_sub, q)
            return
        v_ext = set(v_ext)
        d = len(v_sub) + 1  # depth of the call adding the next node
        p = probs[d - 1]
        while v_ext:
            w = min(v_ext)  # ascending-id removal keeps runs reproducible
            v_ext.remove(w)
            if p < 1.0 and rng.random() >= p:
                continue
            excl = {u for u in adj[w] if u > v and u not in closed}
            extend(v_sub | {w}, v_ext | excl, closed | adj[w], v, q * p)

    p1 = probs[0]
    for v in range(n):
        if p1 < 1.0 and rng.random() >= p1:
            continue
        ext = {u for u in adj[v] if u > v}
        extend({v}, ext, {v} | adj[v], v, p1)
    return out


def _esu_collect(
    graph_set: GraphSet,
    cfg: SampleConfig,
    collect_weights: bool,
) -> tuple[list[SubgraphInstance], list[float], SampleStats]:
    rng = np.random.default_rng(cfg.seed)
    probs = depth_probs(cfg.k, cfg.r)
    deterministic = all(p >= 1.0 for p in probs)
    stats = SampleStats()
    instances: list[SubgraphInstance] = []
    weights: list[float] = []
    while len(instances) < cfg.tc:
        if stats.passes >= MAX_PASSES:
            raise StallError(
                f"esu made {stats.passes} passes for {len(instances)}/{cfg.tc}"
                f" instances")
        before = len(instances)
        for gid, g in zip(graph_set.ids, graph_set.graphs):
            leaves = esu_pass(g, cfg.k, probs, rng, collect_weights)
            for leaf in leaves:
                if collect_weights:
                    nodes, w = leaf
                    weights.append(w)
                else:
                    nodes = leaf
                instances.append(SubgraphInstance(gid, nodes))
        stats.passes += 1
        stats.draws = len(instances)
        if deterministic and len(instances) == before:
            raise StallError("exhaustive pass found no connected k-subgraphs")
    return instances, weights, stats


def _reservoir_downsample(items: list, tc: int, rng) -> list[int]:
    """Indices of a uniform tc-subset, selected by reservoir."""
    kept = list(range(min(tc, len(items))))
    for i in range(tc, len(items)):
        j = int(rng.integers(0, i + 1))
        if j < tc:
            kept[j] = i
    return sorted(kept)


def rand_esu_sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Randomized ESU: depth-d subtrees survive with probability p_d, so
    every leaf is reached with the same product probability."""
    start = time.monotonic()
    instances, _, stats = _esu_collect(graph_set, cfg, collect_weights=False)
    rng = np.random.default_rng((cfg.seed, 1))
    if len(instances) > cfg.tc:
        kept = _reservoir_downsample(instances, cfg.tc, rng)
        instances = [instances[i] for i in kept]
    stats.wall_time = time.monotonic() - start
    return SampleResult(instances, None, stats)


def rand_fase_sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Randomized enumeration with inverse-probability leaf weights.

    Summing weights per pattern and dividing by the pass count gives an
    unbiased estimate of the exact per-pattern count; downsampled results
    are rescaled by collected/kept to keep those totals unbiased.
    """
    start = time.monotonic()
    instances, weights, stats = _esu_collect(graph_set, cfg, collect_weights=True)
    rng = np.random.default_rng((cfg.seed, 1))
    weights_arr = np.asarray(weights, dtype=np.float64)
    if len(instances) > cfg.tc:
        kept = _reservoir_downsample(instances, cfg.tc, rng)
        scale = len(instances) / cfg.tc
        instances = [instances[i] for i in kept]
        weights_arr = weights_arr[kept] * scale
    stats.wall_time = time.monotonic() - start
    return SampleResult(instances, weights_arr, stats)


def exact_esu_sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Single exhaustive pass; tc is ignored."""
    start = time.monotonic()
    stats = SampleStats(passes=1)
    instances = []
    for gid, g in zip(graph_set.ids, graph_set.graphs):
        for nodes in esu_pass(g, cfg.k):
            instances.append(SubgraphInstance(gid, nodes))
    stats.draws = len(instances)
    stats.wall_time = time.monotonic() - start
    return SampleResult(instances, None, stats)


_SAMPLERS = {
    "ars": ars_sample,
    "nrs": nrs_sample,
    "rand_esu": rand_esu_sample,
    "rand_fase": rand_fase_sample,
    "exact_esu": exact_esu_sample,
}


def sample(graph_set: GraphSet, cfg: SampleConfig) -> SampleResult:
    """Dispatch to the configured sampler."""
    return _SAMPLERS[cfg.method](graph_set, cfg)


# ---------------------------------------------------------------------------
# exact per-class enumeration


def enumerate_k_subgraphs(
    graph_set: GraphSet, k: int
) -> dict[PatternKey, tuple[Pattern, int, list[SubgraphInstance]]]:
    """Exact isomorphism-class census of all connected induced k-subgraphs.

    Returns {key: (pattern, count, instances)}.  Classes whose digests
    collide are told apart by a one-byte suffix on the later keys, so the
    mapping is always one class per key.
    """
    buckets: dict[PatternKey, list[tuple[TypedDigraph, SubgraphInstance]]] = {}
    for gid, g in zip(graph_set.ids, graph_set.graphs):
        for nodes in esu_pass(g, k):
            sub = induced_subgraph(g, nodes)
            key = pattern_key(sub)
            buckets.setdefault(key, []).append((sub, SubgraphInstance(gid, nodes)))
    result: dict[PatternKey, tuple[Pattern, int, list[SubgraphInstance]]] = {}
    for key, members in buckets.items():
        classes = canonicalize([sub for sub, _ in members])
        for class_idx, (pattern, indices) in enumerate(classes):
            out_key = key if class_idx == 0 else PatternKey(
                key.digest + bytes([class_idx]))
            occurrences = [members[i][1] for i in indices]
            result[out_key] = (pattern, len(occurrences), occurrences)
    return result


def weighted_pattern_totals(
    result: SampleResult, graph_set: GraphSet
) -> dict[PatternKey, float]:
    """Per-isomorphism-class weighted totals of a sample, normalized by the
    number of enumeration passes (1 for single-pass samplers)."""
    weights = result.weights
    if weights is None:
        weights = np.ones(len(result.instances))
    passes = max(result.stats.passes, 1)
    buckets: dict[PatternKey, list[tuple[TypedDigraph, float]]] = {}
    for inst, w in zip(result.instances, weights):
        g = graph_set.graph_by_id(inst.graph_id)
        sub = induced_subgraph(g, inst.nodes)
        buckets.setdefault(pattern_key(sub), []).append((sub, float(w)))
    totals: dict[PatternKey, float] = {}
    for key, members in buckets.items():
        classes = canonicalize([sub for sub, _ in members])
        for class_idx, (_, indices) in enumerate(classes):
            out_key = key if class_idx == 0 else PatternKey(
                key.digest + bytes([class_idx]))
            totals[out_key] = sum(members[i][1] for i in indices) / passes
    return totals
