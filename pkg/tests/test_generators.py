import math

import numpy as np
import pytest

from netnorm.generators import (
    Family,
    InitialState,
    McmcConfig,
    ModelSpec,
    ThetaDraw,
    block_count,
    ergm_change_stats,
    gen_bernoulli,
    gen_erdos_renyi,
    gen_hier_bernoulli,
    gen_hier_markov,
    gen_markov_ergm,
    gen_offset_bernoulli,
    logit,
    markov_ergm_chain,
    offset_tie_probability,
    sample_membership,
    simulate,
    study_models,
)
from netnorm.graph import Graph, Membership, build_graph
from netnorm.rng import substream
from netnorm.statistics import subgraph_census

import oracles

# Exact P(no empty block) for Dirichlet(10)-multinomial, K=4, n=20 (scipy pmf summed over compositions).
NO_EMPTY_BLOCK_P = 0.9596729042


def rng(i=0):
    return np.random.default_rng(i)


def test_bernoulli_extremes():
    assert gen_bernoulli(7, 0.0, rng()).edge_count == 0
    assert gen_bernoulli(7, 1.0, rng()) == Graph.complete(7)


def test_bernoulli_mean_density():
    r = rng(1)
    d = [gen_bernoulli(100, 0.2, r).edge_count / 4950 for _ in range(200)]
    se = math.sqrt(0.2 * 0.8 / 4950 / 200)
    assert abs(np.mean(d) - 0.2) < 3 * se


def test_erdos_renyi_single_dyad():
    r = rng(2)
    hits = sum(gen_erdos_renyi(2, r).edge_count for _ in range(10_000))
    assert abs(hits / 1e4 - 0.5) < 3 * math.sqrt(0.25 / 1e4)


def test_determinism():
    a = simulate(study_models()["hier_markov"], 30, substream(7, "x", 1))
    b = simulate(study_models()["hier_markov"], 30, substream(7, "x", 1))
    assert a == b


def test_offset_probability_formula():
    assert offset_tie_probability(20, math.log(3)) == pytest.approx(3 / 23)
    assert offset_tie_probability(100, math.log(3)) == pytest.approx(3 / 103)
    assert offset_tie_probability(50, -30.0) < 1e-9
    assert gen_offset_bernoulli(50, -30.0, rng()).edge_count == 0


def test_offset_density_by_size():
    r = rng(3)
    for n, p in ((20, 3 / 23), (100, 3 / 103)):
        dyads = n * (n - 1) // 2
        d = np.mean([gen_offset_bernoulli(n, math.log(3), r).edge_count / dyads for _ in range(200)])
        assert abs(d - p) < 3 * math.sqrt(p * (1 - p) / dyads / 200)


def test_change_stat_examples():
    assert ergm_change_stats(Graph.empty(3), 0, 1) == (1, 0, 0)
    assert ergm_change_stats(build_graph(3, [(0, 1), (1, 2)]), 0, 2) == (1, 2, 1)
    assert ergm_change_stats(Graph.complete(3), 0, 1) == (-1, -2, -1)
    with pytest.raises(ValueError):
        ergm_change_stats(Graph.empty(3), 1, 1)


def test_change_stats_match_recount():
    r = rng(4)
    for _ in range(500):
        n = int(r.integers(3, 10))
        a = np.triu(r.random((n, n)) < r.random(), 1)
        g = Graph(a | a.T)
        i, j = r.choice(n, 2, replace=False)
        flipped = g.adjacency.copy()
        flipped[i, j] = flipped[j, i] = not flipped[i, j]
        before = oracles.census(oracles.adjacency_sets(n, g.edges()))
        after = oracles.census(oracles.adjacency_sets(n, Graph(flipped).edges()))
        assert ergm_change_stats(g, int(i), int(j)) == tuple(x - y for x, y in zip(after, before))


def test_edges_only_chain_matches_bernoulli_small():
    from netnorm.compare import ks_two_sample

    r = rng(5)
    theta = (logit(0.2), 0.0, 0.0)
    cfg = McmcConfig(initial_state=InitialState.EMPTY)
    mc = [gen_markov_ergm(20, theta, r, cfg).edge_count / 190 for _ in range(200)]
    direct = [gen_bernoulli(20, 0.2, r).edge_count / 190 for _ in range(200)]
    assert ks_two_sample(mc, direct) < 0.15


def test_zero_theta_mean_density():
    r = rng(6)
    cfg = McmcConfig(initial_state=InitialState.EMPTY, spacing=191)
    draws = markov_ergm_chain(20, (0.0, 0.0, 0.0), 300, r, cfg)
    d = np.mean([g.edge_count / 190 for g in draws])
    assert abs(d - 0.5) < 3 * math.sqrt(0.25 / 190 / 300)


def test_chain_validation():
    with pytest.raises(ValueError):
        markov_ergm_chain(5, (0.0, 0.0), 1, rng())
    with pytest.raises(ValueError):
        markov_ergm_chain(5, (math.inf, 0.0, 0.0), 1, rng())
    with pytest.raises(ValueError):
        McmcConfig(spacing=0)


def test_block_count_rule():
    assert block_count(20) == 4
    assert block_count(3) == 1
    assert block_count(100) == 20
    assert block_count(12, 3) == 3
    with pytest.raises(ValueError):
        block_count(10, "sqrt")


def test_membership_k1_and_concentration():
    assert (sample_membership(9, 1, 10.0, rng()).assignment == 0).all()
    r = rng(7)
    full = np.mean([(sample_membership(20, 4, 10.0, r).block_sizes() > 0).all() for _ in range(10_000)])
    se = math.sqrt(NO_EMPTY_BLOCK_P * (1 - NO_EMPTY_BLOCK_P) / 1e4)
    assert full >= 0.9
    assert abs(full - NO_EMPTY_BLOCK_P) < 4 * se


def test_hier_bernoulli_degenerate_is_bernoulli():
    spec = ModelSpec(Family.HIER_BERNOULLI, {"p_within": 0.3, "p_btw": 0.3}, theta_draw=ThetaDraw.FIXED)
    r = rng(8)
    d = np.mean([gen_hier_bernoulli(30, spec, r).edge_count / 435 for _ in range(300)])
    assert abs(d - 0.3) < 3 * math.sqrt(0.21 / 435 / 300)


def test_hier_bernoulli_between_edges_independent_given_membership():
    spec = ModelSpec(Family.HIER_BERNOULLI, {"p_within": 0.9, "p_btw": 0.1}, theta_draw=ThetaDraw.FIXED)
    z = Membership(np.array([0, 0, 0, 1, 1, 1]), 2)
    r = rng(9)
    draws = np.array([gen_hier_bernoulli(6, spec, r, membership=z).adjacency for _ in range(10_000)])
    a, b = draws[:, 0, 3], draws[:, 1, 4]
    assert abs(a.mean() - 0.1) < 3 * math.sqrt(0.09 / 1e4)
    # Independence: joint frequency factorizes.
    assert abs((a & b).mean() - a.mean() * b.mean()) < 3 * math.sqrt(0.01 * 0.99 / 1e4)
    within = draws[:, 0, 1].mean()
    assert abs(within - 0.9) < 3 * math.sqrt(0.09 / 1e4)


def test_hier_markov_single_block_is_markov():
    spec = ModelSpec(Family.HIER_MARKOV, {"mu_edge": -1.0, "mu_2star": 0.0, "mu_triangle": 0.0, "p_btw": 0.5},
                     k_rule=1, theta_draw=ThetaDraw.FIXED)
    r = rng(10)
    d = np.mean([gen_hier_markov(12, spec, r).edge_count / 66 for _ in range(300)])
    p = 1 / (1 + math.e)
    assert abs(d - p) < 4 * math.sqrt(p * (1 - p) / 66 / 300)


def test_model_spec_validation_and_round_trip():
    with pytest.raises(ValueError):
        ModelSpec(Family.BERNOULLI)
    with pytest.raises(ValueError):
        ModelSpec(Family.BERNOULLI, {"p": 1.5})
    with pytest.raises(ValueError):
        ModelSpec(Family.HIER_BERNOULLI, {"mu_within": 0.0})
    for spec in study_models().values():
        assert ModelSpec.from_dict(spec.to_dict()) == spec


def test_study_models_settings():
    m = study_models()
    assert set(m) == {"erdos_renyi", "bernoulli", "offset_bernoulli", "markov", "hier_bernoulli", "hier_markov"}
    assert m["markov"].params == {"theta_edge": -1.55, "theta_2star": -0.05, "theta_triangle": 0.25}
    assert m["hier_bernoulli"].p_btw == 0.10 and m["hier_markov"].p_btw == 0.25
    assert m["hier_bernoulli"].mu_within == pytest.approx(logit(0.2))
    assert m["offset_bernoulli"].params["theta_deg"] == pytest.approx(math.log(3))
