import math

import networkx as nx
import numpy as np
import pytest

from netnorm.graph import Graph, build_graph
from netnorm.statistics import (
    ALL_STATISTICS,
    UNREACHABLE,
    ClosenessMode,
    Conventions,
    PathLengthConvention,
    StatisticKind,
    all_pairs_shortest_paths,
    average_path_length,
    betweenness_centralization,
    closeness_centralization,
    compute_all,
    degree_centralization,
    density,
    max_betweenness_centralization,
    max_closeness_centralization,
    max_degree_centralization,
    subgraph_census,
    transitivity,
    vertex_betweenness,
    vertex_closeness,
)

import oracles

PATH3 = build_graph(3, [(0, 1), (1, 2)])


def star(n):
    return build_graph(n, [(0, j) for j in range(1, n)])


def test_statistic_kinds_closed_set():
    assert len(ALL_STATISTICS) == 9
    assert StatisticKind.DEGREE_CENT_NORM.raw_counterpart is StatisticKind.DEGREE_CENT
    assert not StatisticKind.DENSITY.is_normalized


def test_distances():
    d = all_pairs_shortest_paths(Graph.complete(3)).dist
    assert (d[~np.eye(3, dtype=bool)] == 1).all()
    assert all_pairs_shortest_paths(PATH3).dist[0, 2] == 2
    assert all_pairs_shortest_paths(Graph.empty(2)).dist[0, 1] == UNREACHABLE


def test_degree_centralization_star():
    assert degree_centralization(star(4)).value == 6
    assert degree_centralization(star(4), normalized=True).value == 1.0
    assert degree_centralization(Graph.complete(6), normalized=True).value == 0.0


def test_closeness_examples():
    s = vertex_closeness(PATH3)
    assert s[1] == pytest.approx(0.5) and s[0] == pytest.approx(1 / 3)
    assert closeness_centralization(PATH3).value == pytest.approx(1 / 3)
    assert closeness_centralization(Graph.complete(4)).value == 0.0
    assert closeness_centralization(Graph.empty(3)).value == 0.0


def test_closeness_largest_component_mode():
    # Triangle plus an isolated node: only the triangle is measured.
    g = build_graph(4, [(0, 1), (1, 2), (0, 2)])
    v = closeness_centralization(g, mode=ClosenessMode.LARGEST_COMPONENT)
    assert v.defined and v.value == 0.0
    assert not closeness_centralization(Graph.empty(3), mode=ClosenessMode.LARGEST_COMPONENT).defined


def test_betweenness_examples():
    assert list(vertex_betweenness(PATH3)) == [0.0, 1.0, 0.0]
    assert betweenness_centralization(PATH3).value == 2.0
    assert betweenness_centralization(Graph.complete(5)).value == 0.0
    assert betweenness_centralization(star(4), normalized=True).value == 1.0


def test_betweenness_matches_networkx():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(5, 25))
        g = nx.gnp_random_graph(n, 0.2, seed=int(rng.integers(1 << 30)))
        ours = vertex_betweenness(build_graph(n, g.edges()))
        ref = nx.betweenness_centrality(g, normalized=False)
        assert np.allclose(ours, [ref[i] for i in range(n)], atol=1e-9)


def test_transitivity_examples():
    assert transitivity(Graph.complete(3)).value == 1.0
    assert transitivity(PATH3).value == 0.0
    assert not transitivity(Graph.empty(4)).defined


def test_transitivity_matches_networkx():
    g = nx.karate_club_graph()
    ours = transitivity(build_graph(g.number_of_nodes(), g.edges())).value
    assert ours == pytest.approx(nx.transitivity(g), abs=1e-12)


def test_path_length_conventions():
    assert average_path_length(Graph.complete(5)).value == 1.0
    assert average_path_length(PATH3).value == pytest.approx(4 / 3)
    assert average_path_length(PATH3, PathLengthConvention.SUM_OVER_N_MINUS_ONE).value == pytest.approx(4.0)
    disconnected = build_graph(4, [(0, 1)])
    assert average_path_length(disconnected).value == 1.0
    assert not average_path_length(disconnected, PathLengthConvention.SUM_OVER_N_MINUS_ONE).defined
    assert not average_path_length(Graph.empty(3)).defined


def test_density_examples():
    assert density(Graph.complete(4)).value == 1.0
    assert density(Graph.empty(10)).value == 0.0
    assert density(build_graph(10, [(i, i + 1) for i in range(9)])).value == pytest.approx(0.2)


def test_census_examples():
    assert subgraph_census(Graph.complete(3)) == (3, 3, 1)
    assert subgraph_census(star(4)) == (3, 3, 0)
    assert subgraph_census(Graph.complete(4)) == (6, 12, 4)


def test_compute_all_examples():
    k4 = compute_all(Graph.complete(4))
    assert k4[StatisticKind.DENSITY].value == 1.0
    assert k4[StatisticKind.TRANSITIVITY].value == 1.0
    assert k4[StatisticKind.AVG_PATH_LENGTH].value == 1.0
    for kind in (StatisticKind.DEGREE_CENT, StatisticKind.BETWEENNESS_CENT, StatisticKind.CLOSENESS_CENT):
        assert k4[kind].value == 0.0
    s5 = compute_all(star(5))
    for kind in (StatisticKind.DEGREE_CENT_NORM, StatisticKind.BETWEENNESS_CENT_NORM,
                 StatisticKind.CLOSENESS_CENT_NORM):
        assert s5[kind].value == pytest.approx(1.0, abs=1e-12)
    e20 = compute_all(Graph.empty(20))
    assert not e20[StatisticKind.TRANSITIVITY].defined
    assert not e20[StatisticKind.AVG_PATH_LENGTH].defined
    assert e20[StatisticKind.DENSITY].value == 0.0
    assert list(k4) == list(ALL_STATISTICS)


def test_normalized_needs_three_nodes():
    g = build_graph(2, [(0, 1)])
    with pytest.raises(ValueError):
        degree_centralization(g, normalized=True)
    assert not compute_all(g)[StatisticKind.DEGREE_CENT_NORM].defined


def test_denominators_closed_form():
    for n in range(3, 9):
        s = star(n)
        assert degree_centralization(s).value == max_degree_centralization(n)
        assert betweenness_centralization(s).value == pytest.approx(max_betweenness_centralization(n), abs=1e-9)
        assert closeness_centralization(s).value == pytest.approx(max_closeness_centralization(n), abs=1e-12)


def test_ranges_on_random_graphs():
    rng = np.random.default_rng(1)
    for _ in range(50):
        n = int(rng.integers(3, 15))
        a = np.triu(rng.random((n, n)) < rng.random(), 1)
        stats = compute_all(Graph(a | a.T))
        for kind in (StatisticKind.DENSITY, StatisticKind.TRANSITIVITY, StatisticKind.DEGREE_CENT_NORM,
                     StatisticKind.BETWEENNESS_CENT_NORM, StatisticKind.CLOSENESS_CENT_NORM):
            v = stats[kind]
            if v.defined:
                assert -1e-12 <= v.value <= 1 + 1e-12


def test_compute_all_agrees_with_single_functions():
    rng = np.random.default_rng(2)
    conv = Conventions(ClosenessMode.LARGEST_COMPONENT, PathLengthConvention.SUM_OVER_N_MINUS_ONE)
    for _ in range(30):
        n = int(rng.integers(3, 12))
        a = np.triu(rng.random((n, n)) < 0.3, 1)
        g = Graph(a | a.T)
        allv = compute_all(g, conv)
        assert allv[StatisticKind.CLOSENESS_CENT_NORM] == closeness_centralization(
            g, True, ClosenessMode.LARGEST_COMPONENT)
        assert allv[StatisticKind.AVG_PATH_LENGTH] == average_path_length(
            g, PathLengthConvention.SUM_OVER_N_MINUS_ONE)


def test_oracle_spot_check():
    g = build_graph(6, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4)])
    nbrs = oracles.adjacency_sets(6, g.edges())
    assert np.allclose(vertex_betweenness(g), [float(x) for x in oracles.betweenness(nbrs)])
    assert np.allclose(vertex_closeness(g), [float(x) for x in oracles.closeness(nbrs)])
    assert math.isclose(transitivity(g).value, float(oracles.transitivity(nbrs)))
