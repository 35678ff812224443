import math

import numpy as np
import pytest

from netnorm.fitting import (
    FittedParams,
    GibbsConfig,
    fit,
    fit_bernoulli,
    fit_hier_bernoulli,
    fit_offset_bernoulli,
    hier_bernoulli_log_posterior,
)
from netnorm.generators import Family, gen_bernoulli
from netnorm.graph import Graph, build_graph


def two_cliques(size=10):
    edges = [(i, j) for b in (0, size) for i in range(b, b + size) for j in range(i + 1, b + size)]
    return build_graph(2 * size, edges)


def test_bernoulli_mle():
    g = build_graph(10, [(i, i + 1) for i in range(9)])
    fp = fit_bernoulli(g)
    assert fp.values["p"] == pytest.approx(0.2)
    assert fp.values["theta_edge"] == pytest.approx(math.log(0.25))


def test_bernoulli_clamps_extremes():
    assert fit_bernoulli(Graph.empty(5)).values["p"] == pytest.approx(1 / 20)
    assert fit_bernoulli(Graph.complete(5)).diagnostics["clamped"] is True
    assert math.isfinite(fit_bernoulli(Graph.complete(5)).values["theta_edge"])


def test_offset_fit_inverts_generator():
    # p = logistic(theta - log n) solved for theta.
    g = build_graph(10, [(i, i + 1) for i in range(9)])
    theta = fit_offset_bernoulli(g).values["theta_deg"]
    assert 1 / (1 + math.exp(-(theta - math.log(10)))) == pytest.approx(0.2)


def test_fitted_params_json_round_trip():
    fp = fit_bernoulli(two_cliques(4))
    back = FittedParams.from_json(fp.to_json())
    assert back.family is Family.BERNOULLI and back.values == fp.values


def test_gibbs_config_validation():
    with pytest.raises(ValueError):
        GibbsConfig(sweeps=10, burn_in_sweeps=10)
    with pytest.raises(ValueError):
        GibbsConfig(beta_prior=(0.0, 1.0))


def test_two_cliques_recovered():
    fp = fit_hier_bernoulli(two_cliques(), GibbsConfig(), np.random.default_rng(0))
    assert fp.values["p_within"] > 0.95
    assert fp.values["p_btw"] < 0.05
    assert fp.values["k"] == 2


def test_map_not_worse_than_start():
    fp = fit_hier_bernoulli(two_cliques(), GibbsConfig(sweeps=300, burn_in_sweeps=100), np.random.default_rng(1))
    assert fp.diagnostics["map_log_posterior"] >= fp.diagnostics["initial_log_posterior"]


def test_log_posterior_prefers_true_partition():
    g = two_cliques()
    truth = np.repeat([0, 1], 10)
    shuffled = np.tile([0, 1], 10)
    assert hier_bernoulli_log_posterior(g, truth) > hier_bernoulli_log_posterior(g, shuffled)


def test_homogeneous_graph_estimates_near_density():
    g = gen_bernoulli(40, 0.5, np.random.default_rng(2))
    fp = fit_hier_bernoulli(g, GibbsConfig(sweeps=400, burn_in_sweeps=100), np.random.default_rng(3))
    density = g.edge_count / 780
    assert abs(fp.values["p_within"] - density) < 0.15
    assert abs(fp.values["p_btw"] - density) < 0.15


def test_fit_dispatch():
    g = two_cliques(4)
    assert fit(Family.BERNOULLI, g).family is Family.BERNOULLI
    with pytest.raises(ValueError):
        fit(Family.HIER_BERNOULLI, g)  # needs a stream
    with pytest.raises(ValueError):
        fit(Family.MARKOV_ERGM, g)
