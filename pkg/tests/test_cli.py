import json

import pytest
from click.testing import CliRunner

from netnorm.artifacts import read_csv
from netnorm.cli import main
from netnorm.graph import Graph
from netnorm.io import read_collection, read_edge_list, write_edge_list
from netnorm.rng import SEED_ENV_VAR


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)
    runner = CliRunner()

    def invoke(*args, env=None):
        return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)

    return invoke


def test_simulate_round_trip_and_determinism(run, tmp_path):
    for out in ("a", "b"):
        r = run("--seed", 3, "--out", tmp_path / out, "simulate", "--family", "bernoulli", "--param", "p=0.2",
                "--sizes", "20", "--replicates", 3)
        assert r.exit_code == 0, r.output
    files = sorted(p.name for p in (tmp_path / "a").glob("*.edges"))
    assert files == ["bernoulli_n20_r0.edges", "bernoulli_n20_r1.edges", "bernoulli_n20_r2.edges"]
    for f in files:
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        assert read_edge_list(tmp_path / "a" / f).n == 20
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["seed"] == 3 and "workers" not in json.dumps(manifest)


def test_simulate_named_markov(run, tmp_path):
    r = run("--out", tmp_path, "simulate", "--model", "markov", "--sizes", "15", "--replicates", 2)
    assert r.exit_code == 0
    spec = json.loads((tmp_path / "manifest.json").read_text())["config"]["spec"]
    assert spec["params"] == {"theta_edge": -1.55, "theta_2star": -0.05, "theta_triangle": 0.25}


def test_simulate_invalid_spec(run, tmp_path):
    r = run("--out", tmp_path, "simulate", "--family", "bernoulli", "--sizes", "10")
    assert r.exit_code == 2
    assert run("--out", tmp_path, "simulate", "--model", "nope").exit_code == 2


def test_seed_env_fallback(run, tmp_path):
    args = ("simulate", "--family", "erdos_renyi", "--sizes", "12")
    run("--out", tmp_path / "env", *args, env={SEED_ENV_VAR: "42"})
    run("--seed", 42, "--out", tmp_path / "flag", *args)
    f = "erdos_renyi_n12_r0.edges"
    assert (tmp_path / "env" / f).read_bytes() == (tmp_path / "flag" / f).read_bytes()


def test_stats_examples(run, tmp_path):
    coll = tmp_path / "coll"
    coll.mkdir()
    write_edge_list(Graph.complete(4), coll / "k4.edges")
    write_edge_list(Graph.empty(5), coll / "empty.edges")
    r = run("--out", tmp_path / "st", "stats", coll)
    assert r.exit_code == 0
    rows = {(x["graph_id"], x["statistic"]): x for x in read_csv(tmp_path / "st" / "raw_stats.csv")}
    assert float(rows[("k4", "density")]["value"]) == 1.0
    assert rows[("empty", "transitivity")]["defined"] == "false"
    assert len(rows) == 18


def test_stats_parse_error_names_line(run, tmp_path):
    bad = tmp_path / "bad.edges"
    bad.write_text("n 3\n0 1\n1 two\n")
    r = run("--out", tmp_path / "o", "stats", bad)
    assert r.exit_code == 2
    assert "bad.edges:3" in r.output


def _simulated(run, tmp_path, reps=3, sizes="20,30"):
    run("--seed", 1, "--out", tmp_path / "sim", "simulate", "--family", "bernoulli", "--param", "p=0.2",
        "--sizes", sizes, "--replicates", reps)
    return tmp_path / "sim"


def test_compare_report_and_figures(run, tmp_path):
    sim = _simulated(run, tmp_path)
    run("--out", tmp_path / "st", "stats", sim)
    r = run("--out", tmp_path / "cmp", "compare", tmp_path / "st" / "raw_stats.csv")
    assert r.exit_code == 0, r.output
    rows = read_csv(tmp_path / "cmp" / "report.csv")
    assert sum(1 for x in rows if x["row"] == "summary") == 9
    assert (tmp_path / "cmp" / "figures" / "ks_sim__density.svg").exists()


def test_compare_identical_groups_all_zero(run, tmp_path):
    csv = tmp_path / "s.csv"
    lines = ["graph_id,n,statistic,value,defined"]
    for n in (10, 20):
        lines += [f"g{n}_{k},{n},density,{v},true" for k, v in enumerate((0.1, 0.2, 0.3))]
    csv.write_text("\n".join(lines) + "\n")
    assert run("--out", tmp_path / "o", "compare", csv).exit_code == 0
    ks = [float(x["ks"]) for x in read_csv(tmp_path / "o" / "report.csv") if x["row"] == "ks"]
    assert ks == [0.0]


def test_compare_single_group_exit_2(run, tmp_path):
    sim = _simulated(run, tmp_path, sizes="20")
    run("--out", tmp_path / "st", "stats", sim)
    assert run("--out", tmp_path / "c", "compare", tmp_path / "st" / "raw_stats.csv").exit_code == 2


def test_compare_malformed_csv(run, tmp_path):
    csv = tmp_path / "m.csv"
    csv.write_text("a,b\n1,2\n")
    assert run("--out", tmp_path / "o", "compare", csv).exit_code == 2


def test_adjust_collection_and_csv(run, tmp_path):
    sim = _simulated(run, tmp_path, reps=4)
    r = run("--seed", 2, "--out", tmp_path / "adj", "adjust", sim, "--family", "bernoulli", "--n-m", 4, "--n-s", 40)
    assert r.exit_code == 0, r.output
    for name in ("adjusted.csv", "reference.csv", "components.json", "manifest.json"):
        assert (tmp_path / "adj" / name).exists()
    run("--out", tmp_path / "st", "stats", sim)
    r = run("--out", tmp_path / "er", "adjust", tmp_path / "st" / "raw_stats.csv", "--family", "erdos-renyi",
            "--n-s", 30)
    assert r.exit_code == 0, r.output
    comp = json.loads((tmp_path / "er" / "components.json").read_text())
    assert comp["family"] == "erdos_renyi" and len(comp["components"]) == 1


def test_adjust_preconditions(run, tmp_path):
    sim = _simulated(run, tmp_path)
    r = run("--out", tmp_path / "a", "adjust", sim, "--family", "bernoulli", "--n-m", 30)
    assert r.exit_code == 2 and "N_M" in r.output
    r = run("--out", tmp_path / "b", "adjust", sim, "--family", "bernoulli", "--n-m", 3, "--n-s", 100)
    assert r.exit_code == 2
    run("--out", tmp_path / "st", "stats", sim)
    r = run("--out", tmp_path / "c", "adjust", tmp_path / "st" / "raw_stats.csv", "--family", "bernoulli")
    assert r.exit_code == 2


def test_fit_command(run, tmp_path):
    sim = _simulated(run, tmp_path, reps=1)
    r = run("--out", tmp_path / "f", "--set", "gibbs.sweeps=50", "--set", "gibbs.burn_in_sweeps=10",
            "fit", sim, "--family", "hier_bernoulli")
    assert r.exit_code == 0, r.output
    fits = json.loads((tmp_path / "f" / "fits.json").read_text())
    assert set(fits) == {gid for gid, _ in read_collection(sim)}
    assert run("--out", tmp_path / "g", "fit", sim, "--family", "markov_ergm").exit_code == 2


def test_config_file_and_overrides(run, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("simulate.model = bernoulli\nsimulate.sizes = 10\nsimulate.replicates = 2\n")
    r = run("--config", cfg, "--set", "simulate.replicates=1", "--out", tmp_path / "o", "simulate")
    assert r.exit_code == 0
    assert len(list((tmp_path / "o").glob("*.edges"))) == 1
    assert run("--set", "broken", "--out", tmp_path / "x", "simulate").exit_code == 2


def test_study_smoke_and_errors(run, tmp_path):
    assert run("--out", tmp_path / "s", "study", "--smoke", "--kind", "direct").exit_code == 0
    assert (tmp_path / "s" / "ad_table.csv").exists()
    assert run("--out", tmp_path / "t", "study").exit_code == 2
    assert run("--out", tmp_path / "u", "study", "--kind", "user").exit_code == 2
