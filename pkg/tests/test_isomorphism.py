import time

import numpy as np
import pytest

from motifdiff.graphs import induced_subgraph
from motifdiff.isomorphism import (
    TIMEOUT,
    automorphism_count,
    count_occurrences,
    is_isomorphic,
)

from .helpers import chain, make_graph, permuted
from .oracles import brute_count_occurrences, brute_isomorphic, random_typed_dag


class TestIsIsomorphic:
    def test_self_under_permutation(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            g = random_typed_dag(rng, 6, a=3, b=3)
            perm = rng.permutation(6)
            assert is_isomorphic(g, permuted(g, perm))

    def test_relabeled_single_edge(self):
        g1 = make_graph([0, 0], [(0, 1, 1)])
        g2 = make_graph([0, 0], [(1, 0, 1)])
        assert is_isomorphic(g1, g2)

    def test_node_types_distinguish(self):
        g1 = make_graph([0, 1], [(0, 1, 1)], a=2)
        g2 = make_graph([1, 0], [(0, 1, 1)], a=2)
        assert not is_isomorphic(g1, g2)
        assert not brute_isomorphic(g1, g2)

    def test_agrees_with_all_bijections_oracle(self):
        rng = np.random.default_rng(42)
        graphs = [random_typed_dag(rng, int(rng.integers(2, 6)), a=2, b=2, density=0.5)
                  for _ in range(24)]
        for g1 in graphs:
            for g2 in graphs:
                assert is_isomorphic(g1, g2) == brute_isomorphic(g1, g2)

    def test_size_mismatch(self):
        assert not is_isomorphic(chain(2), chain(3))


class TestCountOccurrences:
    def test_edge_in_typed_chain(self):
        host = make_graph([0, 1, 2], [(0, 1, 1), (1, 2, 1)], a=3)
        sub = make_graph([0, 1], [(0, 1, 1)], a=3)
        assert count_occurrences(sub, host) == 1

    def test_single_node_pattern(self):
        host = make_graph([0, 0, 0], [], a=1, b=2)
        sub = make_graph([0], [], a=1, b=2)
        assert count_occurrences(sub, host) == 3

    def test_chain_pairs(self):
        host = chain(3)
        sub = chain(2)
        assert count_occurrences(sub, host) == 2

    def test_pattern_larger_than_host(self):
        assert count_occurrences(chain(4), chain(3)) == 0

    def test_agrees_with_brute_force(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            n = int(rng.integers(3, 9))
            host = random_typed_dag(rng, n, a=2, b=2, density=0.4)
            k = int(rng.integers(2, min(5, n + 1)))
            subset = rng.choice(n, size=k, replace=False)
            sub = induced_subgraph(host, sorted(subset))
            assert count_occurrences(sub, host) == brute_count_occurrences(sub, host)

    def test_own_subset_always_found(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            n = int(rng.integers(2, 9))
            g = random_typed_dag(rng, n, a=3, b=2)
            k = int(rng.integers(1, n + 1))
            subset = sorted(rng.choice(n, size=k, replace=False))
            sub = induced_subgraph(g, subset)
            assert count_occurrences(sub, g) >= 1

    def test_cutoff_returns_sentinel(self):
        # dense untyped host makes the matcher explore many branches
        n = 24
        et = np.ones((n, n), dtype=np.int32)
        np.fill_diagonal(et, 0)
        host = make_graph([0] * n, [], a=1, b=2)
        host = type(host)(np.zeros(n, dtype=np.int32), et, (1, 2))
        sub_et = np.ones((10, 10), dtype=np.int32)
        np.fill_diagonal(sub_et, 0)
        sub = type(host)(np.zeros(10, dtype=np.int32), sub_et, (1, 2))
        start = time.monotonic()
        result = count_occurrences(sub, host, cutoff=0.05)
        elapsed = time.monotonic() - start
        assert result is TIMEOUT
        assert elapsed < 5.0

    def test_automorphism_count(self):
        # undirected-looking pair a<->b has the swap automorphism
        g = make_graph([0, 0], [(0, 1, 1), (1, 0, 1)])
        assert automorphism_count(g) == 2
        assert automorphism_count(chain(3)) == 1
