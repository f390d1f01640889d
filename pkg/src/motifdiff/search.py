"""Beam search over pattern sizes, scored by the diffusion estimator.

Level 3 is seeded with exact enumeration; every later level expands each
stored occurrence by one adjacent node, deduplicates by node set, groups
isomorphic candidates, scores one representative per class, and keeps the
top N.  Occurrence lists ride along so the next level can expand locally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dataset import GraphSet
from .errors import EmptyBeamError, NumericalInstabilityError, ValidationError
from .graphs import SubgraphInstance, TypedDigraph, induced_subgraph
from .patterns import Pattern, PatternKey, canonicalize, pattern_key
from .sampling import enumerate_k_subgraphs

__all__ = [
    "BeamConfig",
    "BeamEntry",
    "Beam",
    "init_beam",
    "expand_one_node",
    "score_candidates",
    "select_top_n",
    "beam_search",
    "save_beam",
]

SEED_SIZE = 3  # beams start from exact enumeration at this size
DEFAULT_INSTANCE_CAP = 5000


@dataclass
class BeamConfig:
    k_max: int
    beam_width: int = 50
    rounds: int = 20
    constraint: Callable[[TypedDigraph], bool] | None = None
    seed: int = 0
    instance_cap: int = DEFAULT_INSTANCE_CAP

    def __post_init__(self):
        if self.k_max < 4:
            raise ValidationError("k_max must be >= 4")
        if self.beam_width < 1 or self.rounds < 1:
            raise ValidationError("beam width and estimation rounds must be >= 1")


@dataclass
class BeamEntry:
    pattern: Pattern
    score: float
    instances: list[SubgraphInstance]


@dataclass
class Beam:
    k: int
    entries: dict[PatternKey, BeamEntry]
    truncated: bool = False

    def patterns(self) -> list[Pattern]:
        return [e.pattern for e in self.entries.values()]

    def ranked(self) -> list[tuple[PatternKey, BeamEntry]]:
        """Entries by descending score, key bytes breaking ties."""
        return sorted(
            self.entries.items(), key=lambda kv: (-kv[1].score, kv[0].digest))


def _cap_instances(instances, cap, rng):
    if len(instances) <= cap:
        return instances
    kept = list(range(cap))
    for i in range(cap, len(instances)):
        j = int(rng.integers(0, i + 1))
        if j < cap:
            kept[j] = i
    return [instances[i] for i in sorted(kept)]


def init_beam(
    graph_set: GraphSet,
    beam_width: int,
    instance_cap: int = DEFAULT_INSTANCE_CAP,
    seed: int = 0,
) -> Beam:
    """Exact census at the seed size; the most frequent classes become the
    beam with log(count) scores and their full (capped) occurrence lists."""
    census = enumerate_k_subgraphs(graph_set, SEED_SIZE)
    if not census:
        raise EmptyBeamError(f"no connected {SEED_SIZE}-subgraphs in the set")
    ordered = sorted(
        census.items(), key=lambda kv: (-kv[1][1], kv[0].digest))[:beam_width]
    entries = {}
    for key, (pattern, count, instances) in ordered:
        rng = np.random.default_rng([seed, SEED_SIZE, *key.digest])
        entries[key] = BeamEntry(
            pattern, float(np.log(count)), _cap_instances(instances, instance_cap, rng))
    return Beam(SEED_SIZE, entries)


def expand_one_node(
    graph_set: GraphSet, beam: Beam
) -> dict[PatternKey, tuple[Pattern, list[SubgraphInstance]]]:
    """Grow every stored occurrence by one adjacent node.

    Candidate node sets are deduplicated per graph, grouped into isomorphism
    classes (hash buckets split exactly), and returned with their occurrence
    lists; every candidate is connected by construction.
    """
    id_to_graph = dict(zip(graph_set.ids, graph_set.graphs))
    adjacency: dict[str, list] = {}
    seen: set[tuple[str, tuple[int, ...]]] = set()
    buckets: dict[PatternKey, list[tuple[TypedDigraph, SubgraphInstance]]] = {}
    for entry in beam.entries.values():
        for inst in entry.instances:
            g = id_to_graph[inst.graph_id]
            if inst.graph_id not in adjacency:
                present = (g.edge_types != 0) | (g.edge_types.T != 0)
                adjacency[inst.graph_id] = [
                    set(np.nonzero(present[v])[0].tolist())
                    for v in range(g.num_nodes)
                ]
            adj = adjacency[inst.graph_id]
            members = set(inst.nodes)
            neighborhood = set()
            for v in inst.nodes:
                neighborhood |= adj[v]
            neighborhood -= members
            for v in neighborhood:
                new_nodes = tuple(sorted(members | {v}))
                dedup = (inst.graph_id, new_nodes)
                if dedup in seen:
                    continue
                seen.add(dedup)
                sub = induced_subgraph(g, new_nodes)
                key = pattern_key(sub)
                buckets.setdefault(key, []).append(
                    (sub, SubgraphInstance(inst.graph_id, new_nodes)))
    result: dict[PatternKey, tuple[Pattern, list[SubgraphInstance]]] = {}
    for key, members in buckets.items():
        for class_idx, (pattern, indices) in enumerate(
                canonicalize([sub for sub, _ in members])):
            out_key = key if class_idx == 0 else PatternKey(
                key.digest + bytes([class_idx]))
            result[out_key] = (pattern, [members[i][1] for i in indices])
    return result


def score_candidates(
    candidates: dict[PatternKey, tuple[Pattern, list[SubgraphInstance]]],
    denoiser,
    ctx,
    rounds: int,
    seed: int = 0,
) -> dict[PatternKey, BeamEntry]:
    """One estimator call per pattern class; each class owns a PRNG stream
    derived from (seed, key), so scores do not depend on iteration order."""
    posterior_fn = denoiser.posterior_fn()
    scored: dict[PatternKey, BeamEntry] = {}
    for key in sorted(candidates, key=lambda k: k.digest):
        pattern, instances = candidates[key]
        rng = np.random.default_rng([seed, *key.digest])
        try:
            estimate = ctx.log_prob(pattern.graph, posterior_fn, rounds, rng)
        except NumericalInstabilityError as exc:
            raise NumericalInstabilityError(
                f"while scoring pattern {key.digest.hex()}: {exc}") from exc
        scored[key] = BeamEntry(pattern, estimate.mean_log_prob, instances)
    return scored


def select_top_n(scored: dict[PatternKey, BeamEntry], beam_width: int, k: int) -> Beam:
    """Keep the highest scores; ties break on key bytes ascending."""
    ordered = sorted(scored.items(), key=lambda kv: (-kv[1].score, kv[0].digest))
    return Beam(k, dict(ordered[:beam_width]))


def beam_search(
    graph_set: GraphSet,
    config: BeamConfig,
    denoisers: dict[int, object],
    ctx,
) -> Beam:
    """Iterate init, expand, filter, score, select up to k_max.

    A level that empties out (after the optional constraint filter) returns
    the last nonempty beam with its ``truncated`` flag set; constraint
    filtering also applies to the seed level, so every pattern of a
    constrained result satisfies the predicate.
    """
    for size in range(SEED_SIZE + 1, config.k_max + 1):
        if size not in denoisers:
            raise ValidationError(f"no denoiser provided for size {size}")
    beam = init_beam(graph_set, config.beam_width, config.instance_cap, config.seed)
    if config.constraint is not None:
        beam = Beam(beam.k, {
            key: entry for key, entry in beam.entries.items()
            if config.constraint(entry.pattern.graph)
        })
        if not beam.entries:
            return Beam(beam.k, {}, truncated=True)
    while beam.k < config.k_max:
        candidates = expand_one_node(graph_set, beam)
        if config.constraint is not None:
            candidates = {
                key: val for key, val in candidates.items()
                if config.constraint(val[0].graph)
            }
        if not candidates:
            beam.truncated = True
            return beam
        scored = score_candidates(
            candidates, denoisers[beam.k + 1], ctx, config.rounds, config.seed)
        beam = select_top_n(scored, config.beam_width, beam.k + 1)
        rng = np.random.default_rng([config.seed, beam.k])
        for entry in beam.entries.values():
            entry.instances = _cap_instances(entry.instances, config.instance_cap, rng)
    return beam


def save_beam(beam: Beam, path) -> None:
    """One JSON record per pattern, highest score first."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, entry in beam.ranked():
            g = entry.pattern.graph
            record = {
                "key": key.digest.hex(),
                "k": beam.k,
                "score": entry.score,
                "instance_count": len(entry.instances),
                "pattern": {
                    "n": g.num_nodes,
                    "node_types": g.node_types.tolist(),
                    "edges": [[s, d, c] for s, d, c in g.edges()],
                },
            }
            fh.write(json.dumps(record) + "\n")
