from collections import Counter

import numpy as np
import pytest
from scipy import stats as sps

from motifdiff.dataset import GraphSet
from motifdiff.errors import StallError, ValidationError
from motifdiff.graphs import induced_subgraph, is_connected
from motifdiff.sampling import (
    SampleConfig,
    ars_sample,
    depth_probs,
    enumerate_k_subgraphs,
    esu_pass,
    nrs_sample,
    rand_esu_sample,
    rand_fase_sample,
    sample,
    weighted_pattern_totals,
)

from .helpers import chain, make_graph
from .oracles import brute_connected_k_subsets, random_typed_dag


def as_set(g, name="g0"):
    return GraphSet([g], [name], g.alphabet)


class TestDepthProbs:
    def test_exponent_zero(self):
        assert depth_probs(4, 0) == [1, 1, 1, 1]

    def test_linear(self):
        assert np.allclose(depth_probs(4, 1), [0.8, 0.6, 0.4, 0.2])

    def test_quadratic_k2(self):
        assert np.allclose(depth_probs(2, 2), [(2 / 3) ** 2, (1 / 3) ** 2])


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValidationError):
            SampleConfig("ars", k=1)
        with pytest.raises(ValidationError):
            SampleConfig("ars", k=3, tc=0)
        with pytest.raises(ValidationError):
            SampleConfig("bogus", k=3)
        with pytest.raises(ValidationError):
            SampleConfig("ars", k=3, r=-1)


class TestArs:
    def test_chain_pairs_only(self):
        gs = as_set(chain(3))
        res = ars_sample(gs, SampleConfig("ars", k=2, tc=5, seed=0))
        assert len(res.instances) == 5
        for inst in res.instances:
            assert inst.nodes in {(0, 1), (1, 2)}

    def test_single_candidate(self):
        gs = as_set(chain(3))
        res = ars_sample(gs, SampleConfig("ars", k=3, tc=4, seed=0))
        assert all(inst.nodes == (0, 1, 2) for inst in res.instances)

    def test_stall_when_k_exceeds_nodes(self):
        gs = as_set(chain(3))
        with pytest.raises(StallError):
            ars_sample(gs, SampleConfig("ars", k=4, tc=1, seed=0))

    def test_edge_weighted_graph_choice(self):
        # selection is edge-weighted (0.9 / 0.1), then acceptance filters:
        # chain(10) keeps 9 of C(10,2)=45 pair draws, chain(2) keeps all
        g_big = chain(10)
        g_small = chain(2)
        gs = GraphSet([g_big, g_small], ["big", "small"], g_big.alphabet)
        res = ars_sample(gs, SampleConfig("ars", k=2, tc=2000, seed=3))
        counts = Counter(inst.graph_id for inst in res.instances)
        frac_big = counts["big"] / 2000
        expected = 0.9 * (9 / 45) / (0.9 * (9 / 45) + 0.1 * 1.0)
        sigma = np.sqrt(expected * (1 - expected) / 2000)
        assert abs(frac_big - expected) < 4 * sigma


class TestNrs:
    def test_chain_k3(self):
        gs = as_set(chain(3))
        res = nrs_sample(gs, SampleConfig("nrs", k=3, tc=5, seed=0))
        assert all(inst.nodes == (0, 1, 2) for inst in res.instances)

    def test_star_center_always_kept(self):
        star = make_graph([0] * 6, [(0, leaf, 1) for leaf in range(1, 6)])
        gs = as_set(star)
        res = nrs_sample(gs, SampleConfig("nrs", k=2, tc=200, seed=1))
        for inst in res.instances:
            assert 0 in inst.nodes

    def test_full_support_on_connected_subsets(self):
        rng = np.random.default_rng(8)
        g = random_typed_dag(rng, 6, a=2, b=2, density=0.5)
        gs = as_set(g)
        exact = set(brute_connected_k_subsets(g, 3))
        res = nrs_sample(gs, SampleConfig("nrs", k=3, tc=10_000, seed=2))
        seen = {inst.nodes for inst in res.instances}
        assert seen == exact

    def test_outputs_connected(self):
        rng = np.random.default_rng(5)
        g = random_typed_dag(rng, 8, density=0.35)
        gs = as_set(g)
        res = nrs_sample(gs, SampleConfig("nrs", k=4, tc=50, seed=7))
        for inst in res.instances:
            sub = induced_subgraph(g, inst.nodes)
            assert sub.num_nodes == 4 and is_connected(sub)


class TestEsuPass:
    def test_exact_on_chain4(self):
        leaves = esu_pass(chain(4), 3)
        assert sorted(leaves) == [(0, 1, 2), (1, 2, 3)]

    def test_matches_brute_force_on_random_dags(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            n = int(rng.integers(3, 9))
            g = random_typed_dag(rng, n, a=2, b=2, density=0.4, connected=False)
            for k in (3, 4):
                if k > n:
                    continue
                leaves = esu_pass(g, k)
                assert len(set(leaves)) == len(leaves), "duplicate leaf"
                assert sorted(leaves) == sorted(brute_connected_k_subsets(g, k))

    def test_two_runs_identical(self):
        g = chain(5)
        assert set(esu_pass(g, 3)) == set(esu_pass(g, 3))


class TestRandEsu:
    def test_downsamples_to_tc(self):
        gs = as_set(chain(6))
        res = rand_esu_sample(gs, SampleConfig("rand_esu", k=3, tc=3, seed=0))
        assert len(res.instances) == 3

    def test_seed_determinism(self):
        gs = as_set(chain(6))
        cfg = SampleConfig("rand_esu", k=3, tc=5, r=1.0, seed=42)
        r1 = rand_esu_sample(gs, cfg)
        r2 = rand_esu_sample(gs, cfg)
        assert r1.instances == r2.instances

    def test_leaf_hit_rate_binomial(self):
        rng = np.random.default_rng(10)
        g = random_typed_dag(rng, 6, a=2, b=2, density=0.5)
        k = 3
        exact = brute_connected_k_subsets(g, k)
        probs = [0.5, 0.5, 0.5]
        passes = 4000
        p_leaf = 0.125
        hits = Counter()
        gen = np.random.default_rng(77)
        for _ in range(passes):
            for leaf in esu_pass(g, k, probs, gen):
                hits[leaf] += 1
        lo, hi = sps.binom.interval(0.997, passes, p_leaf)
        for leaf in exact:
            assert lo <= hits[leaf] <= hi, f"leaf {leaf}: {hits[leaf]} not in [{lo},{hi}]"

    def test_stall_on_impossible_k(self):
        g = make_graph([0, 0, 0], [(0, 1, 1)])  # component of size 2 max
        with pytest.raises(StallError):
            rand_esu_sample(as_set(g), SampleConfig("rand_esu", k=3, tc=1, seed=0))


class TestRandFase:
    def test_unit_weights_at_p_one(self):
        gs = as_set(chain(5))
        res = rand_fase_sample(gs, SampleConfig("rand_fase", k=3, tc=3, seed=0))
        assert res.weights is not None
        assert np.allclose(res.weights, 1.0)

    def test_weighted_totals_unbiased(self):
        rng = np.random.default_rng(4)
        g = random_typed_dag(rng, 7, a=2, b=2, density=0.45)
        gs = as_set(g)
        exact = enumerate_k_subgraphs(gs, 3)
        trials = 400
        sums = {key: [] for key in exact}
        for trial in range(trials):
            cfg = SampleConfig("rand_fase", k=3, tc=40, r=1.0, seed=trial)
            res = rand_fase_sample(gs, cfg)
            totals = weighted_pattern_totals(res, gs)
            for key in exact:
                sums[key].append(totals.get(key, 0.0))
        for key, (_, count, _) in exact.items():
            values = np.array(sums[key])
            sem = values.std(ddof=1) / np.sqrt(trials)
            assert abs(values.mean() - count) <= 3 * sem + 1e-9

    def test_empty_graph_set(self):
        gs = GraphSet([], [], (2, 2))
        with pytest.raises(StallError):
            rand_fase_sample(gs, SampleConfig("rand_fase", k=3, tc=1, seed=0))


class TestSamplerContract:
    @pytest.mark.parametrize("method", ["ars", "nrs", "rand_esu", "rand_fase"])
    def test_instances_are_connected_k_subgraphs(self, method):
        rng = np.random.default_rng(6)
        graphs = [random_typed_dag(rng, 8, a=2, b=2, density=0.4)
                  for _ in range(3)]
        gs = GraphSet(graphs, [f"g{i}" for i in range(3)], (2, 2))
        cfg = SampleConfig(method, k=4, tc=25, seed=9)
        res = sample(gs, cfg)
        assert len(res.instances) == 25
        for inst in res.instances:
            sub = induced_subgraph(gs.graph_by_id(inst.graph_id), inst.nodes)
            assert sub.num_nodes == 4
            assert is_connected(sub)


class TestEnumerate:
    def test_chain4_k2(self):
        gs = as_set(chain(4))
        census = enumerate_k_subgraphs(gs, 2)
        assert len(census) == 1
        (_, count, instances), = census.values()
        assert count == 3 and len(instances) == 3

    def test_chain4_k3(self):
        census = enumerate_k_subgraphs(as_set(chain(4)), 3)
        assert len(census) == 1
        (_, count, _), = census.values()
        assert count == 2

    def test_diamond_k3(self):
        g = make_graph([0] * 4, [(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 1)])
        census = enumerate_k_subgraphs(as_set(g), 3)
        counts = sorted(count for _, count, _ in census.values())
        assert counts == [1, 1, 2]  # fork, join, two paths

    def test_sampler_dispatch(self):
        gs = as_set(chain(4))
        res = sample(gs, SampleConfig("exact_esu", k=2, tc=1, seed=0))
        assert len(res.instances) == 3
