import math
import time

import numpy as np
import pytest

from netnorm.artifacts import read_csv
from netnorm.config import ConfigError
from netnorm.experiments import (
    StudyConfig,
    StudyKind,
    adjustment_plan,
    recommend_family,
    run_direct_comparison,
    run_feature_detection,
    run_study,
    run_user_data,
    simulate_dataset,
    size_trend,
    smoke_config,
    study_config_from_settings,
)
from netnorm.generators import Family, gen_bernoulli, gen_offset_bernoulli, study_models
from netnorm.io import write_edge_list
from netnorm.statistics import ALL_STATISTICS, StatisticKind


def _collection(tmp_path, maker, seed=0):
    r = np.random.default_rng(seed)
    for i, n in enumerate(range(27, 55)):
        write_edge_list(maker(n, r), tmp_path / f"g{i:02d}.edges")
    return tmp_path


@pytest.mark.parametrize("kind", ["direct", "adjustment", "feature"])
def test_smoke_studies_finish_quickly(kind, tmp_path):
    t = time.perf_counter()
    run_study(smoke_config(kind, seed=3), tmp_path)
    assert time.perf_counter() - t < 60
    assert (tmp_path / "manifest.json").exists()
    assert (tmp_path / "raw_stats.csv").exists()


def test_direct_smoke_all_cells_defined(tmp_path):
    res = run_direct_comparison(smoke_config("direct", seed=4), tmp_path)
    table = read_csv(tmp_path / "ad_table.csv")
    assert [r["statistic"] for r in table] == [k.value for k in ALL_STATISTICS]
    assert len(table[0]) == 1 + 6
    for row in table:
        for model in study_models():
            assert math.isfinite(float(row[model]))
    assert res.ad("erdos_renyi", StatisticKind.DEGREE_CENT) > 0
    assert (tmp_path / "ks_heatmaps" / "markov__density.csv").exists()
    assert (tmp_path / "figures" / "ks_markov__density.svg").exists()
    assert (tmp_path / "histograms" / "markov__density.csv").exists()


def test_datasets_are_shared_across_studies():
    spec = study_models()["bernoulli"]
    a = simulate_dataset("bernoulli", spec, [20, 30], 3, seed=1)
    b = simulate_dataset("bernoulli", spec, [30], 3, seed=1)
    assert [g for gid, g in a if gid.startswith("bernoulli_n30")] == [g for _, g in b]


def test_adjustment_plan_restricts_hier_by_default():
    cfg = StudyConfig(StudyKind.ADJUSTMENT)
    plan = adjustment_plan(cfg)
    hier = [d for d, f in plan if f is Family.HIER_BERNOULLI]
    assert hier == ["hier_bernoulli", "hier_markov"]
    full = adjustment_plan(StudyConfig(StudyKind.ADJUSTMENT, full_hier_matrix=True))
    assert len(full) == 6 * 4


def test_adjustment_smoke_outputs(tmp_path):
    run_study(smoke_config("adjustment", seed=5), tmp_path)
    rows = read_csv(tmp_path / "ad_adjusted.csv")
    methods = {(r["dataset"], r["method"]) for r in rows}
    assert ("erdos_renyi", "unadjusted") in methods and ("erdos_renyi", "erdos_renyi") in methods
    assert ("hier_markov", "hier_bernoulli") in methods
    assert ("markov", "hier_bernoulli") not in methods
    assert all(float(r["ad_raw"]) > 0 for r in rows)
    assert (tmp_path / "figures" / "reciprocal_ad_markov.svg").exists()
    assert (tmp_path / "adjusted" / "bernoulli__bernoulli" / "components.json").exists()


def test_feature_smoke_outputs(tmp_path):
    res = run_feature_detection(smoke_config("feature", seed=6), tmp_path)
    assert res.variants == ["hier_markov_pbtw0.10", "hier_markov_pbtw0.25"]
    q = read_csv(tmp_path / "quartiles.csv")
    assert len(q) == 9 * 2 * 2 * 2
    sep = res.at(StatisticKind.DENSITY, 40)
    assert 0 <= sep.ks_adjusted <= 1 and sep.critical > 0


def test_user_data_recommends_bernoulli(tmp_path):
    (tmp_path / "c").mkdir()
    coll = _collection(tmp_path / "c", lambda n, r: gen_bernoulli(n, 0.2, r))
    res = run_user_data(smoke_config("user"), coll, tmp_path / "out")
    assert res.recommendation is Family.BERNOULLI
    assert abs(res.density_trend.relative_change) < abs(res.degree_trend.relative_change)
    assert (tmp_path / "out" / "correlation_table.csv").exists()
    assert (tmp_path / "out" / "ranks.csv").exists()
    assert (tmp_path / "out" / "figures" / "density_vs_n.svg").exists()


def test_user_data_recommends_offset(tmp_path):
    (tmp_path / "c").mkdir()
    coll = _collection(tmp_path / "c", lambda n, r: gen_offset_bernoulli(n, math.log(3), r))
    res = run_user_data(smoke_config("user"), coll, tmp_path / "out")
    assert res.recommendation is Family.OFFSET_BERNOULLI
    assert res.density_trend.slope < 0


def test_user_data_single_graph_errors(tmp_path):
    write_edge_list(gen_bernoulli(10, 0.3, np.random.default_rng(0)), tmp_path / "only.edges")
    with pytest.raises(ValueError):
        run_user_data(smoke_config("user"), tmp_path, tmp_path / "out")


def test_size_trend_and_recommendation():
    flat = size_trend([(20, 0.2), (40, 0.2), (60, 0.2)])
    assert flat.slope == pytest.approx(0.0, abs=1e-12)
    rising = size_trend([(20, 4.0), (40, 8.0), (60, 12.0)])
    assert recommend_family(flat, rising) is Family.BERNOULLI
    assert recommend_family(rising, flat) is Family.OFFSET_BERNOULLI
    single = size_trend([(20, 0.1), (20, 0.3)])
    assert math.isnan(single.slope)


def test_study_config_from_settings():
    flat = {
        "study.kind": "feature",
        "study.sizes": "20,60,100",
        "study.replicates": "50",
        "study.feature.p_btw": "0.10,0.25",
        "gibbs.sweeps": "300",
        "gibbs.burn_in_sweeps": "100",
        "model.markov.mcmc.burn_in": "1000",
        "model.mine.family": "bernoulli",
        "model.mine.params.p": "0.3",
    }
    cfg = study_config_from_settings(flat, seed=11)
    assert cfg.study is StudyKind.FEATURE and cfg.sizes == (20, 60, 100) and cfg.replicates == 50
    assert cfg.gibbs.sweeps == 300
    assert cfg.models["markov"].mcmc.burn_in == 1000
    assert cfg.models["mine"].params == {"p": 0.3}
    assert study_config_from_settings({"study.kind": "feature"}, 1).replicates == 250
    with pytest.raises(ConfigError):
        study_config_from_settings({"study.kind": "direct", "study.bogus": "1"}, 1)
    with pytest.raises(ConfigError):
        study_config_from_settings({}, 1)


def test_study_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(StudyKind.DIRECT, sizes=())
    with pytest.raises(ValueError):
        StudyConfig(StudyKind.DIRECT, replicates=0)
    with pytest.raises(ValueError):
        StudyConfig(StudyKind.ADJUSTMENT, families=(Family.MARKOV_ERGM,))
