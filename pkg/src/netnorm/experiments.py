"""End-to-end studies: direct comparison, adjustment comparison, feature detection, user data.

Every study writes its artifacts under one output directory and finishes
with ``manifest.json`` (config, seed and artifact checksums).  Graph ``r`` of
size ``n`` in dataset ``name`` is always drawn from the substream
``(seed, "dataset/<name>", n, r)``, so datasets are shared between studies
and independent of the worker count.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from . import svg
from .adjustment import (
    ADJUSTMENT_FAMILIES,
    DEFAULT_N_M,
    DEFAULT_N_S,
    AdjustedValue,
    AdjustmentResult,
    RawStatistic,
    raw_statistics,
    run_adjustment,
    write_adjustment,
)
from .artifacts import write_csv, write_manifest
from .compare import (ComparisonReport, SampleGroup, ad_k_sample_raw, build_report, ks_critical_value, ks_two_sample,
                      pearson_with_n)
from .config import ConfigError, Settings, nest, section
from .fitting import GibbsConfig
from .generators import Family, ModelSpec, simulate, study_models
from .graph import Graph
from .io import read_collection
from .parallel import pmap
from .rng import DEFAULT_SEED, derive_seed, substream
from .statistics import ALL_STATISTICS, ClosenessMode, Conventions, PathLengthConvention, StatisticKind

DEFAULT_SIZES = tuple(range(20, 101, 10))
RECIPROCAL_AD_CAP = 0.10


class StudyKind(str, Enum):
    DIRECT = "direct"
    ADJUSTMENT = "adjustment"
    FEATURE = "feature"
    USER = "user"


@dataclass(frozen=True)
class StudyConfig:
    study: StudyKind
    seed: int = DEFAULT_SEED
    sizes: tuple[int, ...] = DEFAULT_SIZES
    replicates: int = 200
    models: Mapping[str, ModelSpec] = field(default_factory=study_models)
    families: tuple[Family, ...] = ADJUSTMENT_FAMILIES
    n_m: int = DEFAULT_N_M
    n_s: int = DEFAULT_N_S
    gibbs: GibbsConfig = field(default_factory=GibbsConfig)
    conventions: Conventions = field(default_factory=Conventions)
    # Hierarchical Bernoulli adjustment is costly; by default only these datasets get it.
    hier_datasets: tuple[str, ...] = ("hier_bernoulli", "hier_markov")
    full_hier_matrix: bool = False
    feature_p_btw: tuple[float, ...] = (0.10, 0.25)
    feature_family: Family = Family.BERNOULLI
    collection: str | None = None
    user_families: tuple[str, ...] = ("auto",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "study", StudyKind(self.study))
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "families", tuple(Family(f) for f in self.families))
        object.__setattr__(self, "feature_family", Family(self.feature_family))
        if not self.sizes:
            raise ValueError("sizes must be nonempty")
        if any(n < 3 for n in self.sizes):
            raise ValueError("study sizes must be at least 3")
        if len(set(self.sizes)) != len(self.sizes):
            raise ValueError("sizes must be distinct")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        bad = [f.value for f in self.families if f not in ADJUSTMENT_FAMILIES]
        if bad or self.feature_family not in ADJUSTMENT_FAMILIES:
            raise ValueError(f"not adjustment families: {bad or [self.feature_family.value]}")
        if not self.models:
            raise ValueError("at least one model is required")
        if len(self.feature_p_btw) < 2:
            raise ValueError("feature detection needs at least two p_btw variants")

    def to_dict(self) -> dict[str, Any]:
        return {
            "study": self.study.value,
            "seed": self.seed,
            "sizes": list(self.sizes),
            "replicates": self.replicates,
            "models": {k: v.to_dict() for k, v in self.models.items()},
            "families": [f.value for f in self.families],
            "n_m": self.n_m,
            "n_s": self.n_s,
            "gibbs": {
                "sweeps": self.gibbs.sweeps,
                "burn_in_sweeps": self.gibbs.burn_in_sweeps,
                "k_max_rule": self.gibbs.k_max_rule,
                "beta_prior": list(self.gibbs.beta_prior),
                "concentration": self.gibbs.concentration,
            },
            "conventions": {
                "closeness": self.conventions.closeness.value,
                "path_length": self.conventions.path_length.value,
            },
            "hier_datasets": list(self.hier_datasets),
            "full_hier_matrix": self.full_hier_matrix,
            "feature_p_btw": list(self.feature_p_btw),
            "feature_family": self.feature_family.value,
            "collection": self.collection,
            "user_families": list(self.user_families),
        }


_STUDY_KEYS = {"kind", "sizes", "replicates", "models", "families", "n_m", "n_s", "hier_datasets",
               "full_hier_matrix", "feature.p_btw", "feature.family", "collection", "user.families"}
_GIBBS_KEYS = {"sweeps", "burn_in_sweeps", "k_max_rule", "beta_a", "beta_b", "concentration"}
_STATS_KEYS = {"closeness", "path_length"}


def _check_keys(flat: Mapping[str, str], prefix: str, allowed: set[str]) -> None:
    unknown = sorted(set(section(flat, prefix)) - allowed)
    if unknown:
        raise ConfigError(f"unknown {prefix} keys: {', '.join(prefix + '.' + k for k in unknown)}")


def gibbs_from_settings(flat: Mapping[str, str]) -> GibbsConfig:
    _check_keys(flat, "gibbs", _GIBBS_KEYS)
    s = Settings(section(flat, "gibbs"))
    base = GibbsConfig()
    k_rule: str | int = s.str("k_max_rule", str(base.k_max_rule))
    if k_rule.isdigit():
        k_rule = int(k_rule)
    return GibbsConfig(
        sweeps=s.int("sweeps", base.sweeps),
        burn_in_sweeps=s.int("burn_in_sweeps", base.burn_in_sweeps),
        k_max_rule=k_rule,
        beta_prior=(s.float("beta_a", base.beta_prior[0]), s.float("beta_b", base.beta_prior[1])),
        concentration=s.float("concentration", base.concentration),
    )


def conventions_from_settings(flat: Mapping[str, str]) -> Conventions:
    _check_keys(flat, "stats", _STATS_KEYS)
    s = Settings(section(flat, "stats"))
    return Conventions(
        closeness=ClosenessMode(s.str("closeness", ClosenessMode.CAP_N.value)),
        path_length=PathLengthConvention(s.str("path_length", PathLengthConvention.MEAN_REACHABLE_PAIRS.value)),
    )


def models_from_settings(flat: Mapping[str, str], base: Mapping[str, ModelSpec] | None = None) -> dict[str, ModelSpec]:
    """Model specs keyed by name; ``model.<name>.<field>`` entries override or add models."""
    models = dict(study_models() if base is None else base)
    overrides = nest(section(flat, "model"))
    for name, fields in overrides.items():
        if not isinstance(fields, dict):
            raise ConfigError(f"model.{name} must be a section, got a value")
        merged = models[name].to_dict() if name in models else {}
        for key, value in fields.items():
            if isinstance(value, dict):
                merged.setdefault(key, {})
                merged[key] = {**(merged[key] or {}), **value}
            else:
                merged[key] = value
        if "family" not in merged:
            raise ConfigError(f"model.{name} needs a family")
        models[name] = ModelSpec.from_dict(merged)
    return models


def study_config_from_settings(flat: Mapping[str, str], seed: int, kind: str | None = None) -> StudyConfig:
    """Build a StudyConfig from flat ``study.*``, ``gibbs.*``, ``stats.*`` and ``model.*`` keys."""
    _check_keys(flat, "study", _STUDY_KEYS)
    s = Settings(section(flat, "study"))
    kind = kind or s.str("kind")
    if kind is None:
        raise ConfigError("study.kind is required (direct, adjustment, feature or user)")
    study = StudyKind(kind)
    all_models = models_from_settings(flat)
    names = s.list("models", list(all_models))
    missing = [m for m in names if m not in all_models]
    if missing:
        raise ConfigError(f"unknown models: {missing}")
    default = StudyConfig(study)
    return StudyConfig(
        study=study,
        seed=seed,
        sizes=tuple(s.int_list("sizes", list(default.sizes))),
        replicates=s.int("replicates", 250 if study is StudyKind.FEATURE else default.replicates),
        models={m: all_models[m] for m in names},
        families=tuple(Family(f) for f in s.list("families", [f.value for f in default.families])),
        n_m=s.int("n_m", default.n_m),
        n_s=s.int("n_s", default.n_s),
        gibbs=gibbs_from_settings(flat),
        conventions=conventions_from_settings(flat),
        hier_datasets=tuple(s.list("hier_datasets", list(default.hier_datasets))),
        full_hier_matrix=s.bool("full_hier_matrix", False),
        feature_p_btw=tuple(s.float_list("feature.p_btw", list(default.feature_p_btw))),
        feature_family=Family(s.str("feature.family", default.feature_family.value)),
        collection=s.str("collection"),
        user_families=tuple(s.list("user.families", list(default.user_families))),
    )


def smoke_config(kind: StudyKind | str, seed: int = DEFAULT_SEED) -> StudyConfig:
    """A reduced configuration that runs in well under a minute."""
    return StudyConfig(
        study=StudyKind(kind),
        seed=seed,
        sizes=(20, 40),
        replicates=20,
        n_m=5,
        n_s=100,
        gibbs=GibbsConfig(sweeps=200, burn_in_sweeps=50),
    )


# ---------------------------------------------------------------------------
# Shared pieces


def graph_id(name: str, n: int, r: int) -> str:
    return f"{name}_n{n}_r{r}"


def _simulate_task(task: tuple) -> Graph:
    spec, name, n, r, seed = task
    return simulate(spec, n, substream(seed, f"dataset/{name}", n, r))


def simulate_dataset(name: str, spec: ModelSpec, sizes: Sequence[int], replicates: int, seed: int,
                     workers: int = 1) -> list[tuple[str, Graph]]:
    """``replicates`` graphs at each size, ordered by size then replicate."""
    keys = [(n, r) for n in sizes for r in range(replicates)]
    graphs = pmap(_simulate_task, [(spec, name, n, r, seed) for n, r in keys], workers)
    return [(graph_id(name, n, r), g) for (n, r), g in zip(keys, graphs)]


def size_groups(points: Iterable[tuple[int, float]]) -> list[SampleGroup]:
    """Group ``(n, value)`` pairs by size; NaN marks an undefined value."""
    by_n: dict[int, list[float]] = defaultdict(list)
    for n, v in points:
        by_n[int(n)].append(float(v))
    return [SampleGroup.from_values(n, by_n[n]) for n in sorted(by_n)]


def _raw_points(rows: Iterable[RawStatistic], kind: StatisticKind) -> list[tuple[int, float]]:
    return [(r.n, r.value.value if r.value.defined else math.nan) for r in rows if r.value.kind is kind]


def _adjusted_points(rows: Iterable[AdjustedValue], kind: StatisticKind) -> list[tuple[int, float]]:
    return [(a.n, a.z if a.defined else math.nan) for a in rows if a.statistic is kind]


def _reports(points_for) -> dict[StatisticKind, ComparisonReport | None]:
    out: dict[StatisticKind, ComparisonReport | None] = {}
    for kind in ALL_STATISTICS:
        groups = [g for g in size_groups(points_for(kind)) if len(g) > 0]
        out[kind] = build_report(groups, kind.value) if len(groups) >= 2 else None
    return out


def raw_reports(rows: Sequence[RawStatistic]) -> dict[StatisticKind, ComparisonReport | None]:
    return _reports(lambda kind: _raw_points(rows, kind))


def adjusted_reports(rows: Sequence[AdjustedValue]) -> dict[StatisticKind, ComparisonReport | None]:
    return _reports(lambda kind: _adjusted_points(rows, kind))


def write_raw_stats(path: str | Path, rows: Iterable[RawStatistic]) -> Path:
    return write_csv(path, ["dataset", "graph_id", "n", "statistic", "value", "defined"],
                     [(r.dataset, r.graph_id, r.n, r.value.kind, r.value.value, r.value.defined) for r in rows])


def write_report(path: str | Path, reports: Iterable[tuple[str, ComparisonReport]]) -> Path:
    """Long-format comparison report: KS rows per size pair, then one summary row per statistic."""
    rows = []
    for dataset, rep in reports:
        for a in range(len(rep.sizes)):
            for b in range(a + 1, len(rep.sizes)):
                rows.append((dataset, rep.statistic, "ks", rep.sizes[a], rep.sizes[b], rep.ks_matrix[a, b],
                             None, None))
        rows.append((dataset, rep.statistic, "summary", None, None, None, rep.ad_stat, rep.pearson_r))
    return write_csv(path, ["dataset", "statistic", "row", "n_i", "n_j", "ks", "ad_stat", "pearson_r"], rows)


def write_ks_matrix(path: str | Path, rep: ComparisonReport) -> Path:
    rows = [(ni, nj, rep.ks_matrix[a, b]) for a, ni in enumerate(rep.sizes) for b, nj in enumerate(rep.sizes)]
    return write_csv(path, ["n_i", "n_j", "ks"], rows)


def write_histogram(path: str | Path, groups: Sequence[SampleGroup], bins: int = 20) -> Path:
    pooled = np.concatenate([g.values for g in groups]) if groups else np.empty(0)
    rows = []
    if pooled.size:
        edges = np.histogram_bin_edges(pooled, bins=bins)
        for g in groups:
            counts, _ = np.histogram(g.values, bins=edges)
            rows.extend((g.label, edges[b], edges[b + 1], int(counts[b])) for b in range(bins))
    return write_csv(path, ["n", "bin_lo", "bin_hi", "count"], rows)


def emit_report_figures(out_dir: Path, stem: str, rep: ComparisonReport, groups: Sequence[SampleGroup],
                        title: str) -> None:
    labels = [str(n) for n in rep.sizes]
    svg.save(out_dir / "figures" / f"ks_{stem}.svg", svg.heatmap(rep.ks_matrix, labels, f"KS: {title}", vmax=1.0))
    svg.save(out_dir / "figures" / f"hist_{stem}.svg",
             svg.histogram([(f"n={g.label}", g.values) for g in groups], title, "value"))


def _finish(out_dir: Path, cfg: StudyConfig, extra: Mapping[str, Any] | None = None) -> Path:
    config = cfg.to_dict()
    if extra:
        config.update(extra)
    return write_manifest(out_dir, config, cfg.seed)


def _require(cfg: StudyConfig, kind: StudyKind) -> None:
    if cfg.study is not kind:
        raise ValueError(f"expected a {kind.value} study config, got {cfg.study.value}")


def _datasets(cfg: StudyConfig, workers: int) -> dict[str, list[tuple[str, Graph]]]:
    return {name: simulate_dataset(name, spec, cfg.sizes, cfg.replicates, cfg.seed, workers)
            for name, spec in cfg.models.items()}


# ---------------------------------------------------------------------------
# Direct comparison


@dataclass
class DirectResult:
    raw: dict[str, list[RawStatistic]]
    reports: dict[str, dict[StatisticKind, ComparisonReport | None]]

    def ad(self, model: str, kind: StatisticKind) -> float:
        rep = self.reports[model][kind]
        return math.nan if rep is None else rep.ad_stat


def run_direct_comparison(cfg: StudyConfig, out_dir: str | Path, workers: int = 1) -> DirectResult:
    """Raw statistics of every model dataset compared across sizes."""
    _require(cfg, StudyKind.DIRECT)
    out = Path(out_dir)
    raw: dict[str, list[RawStatistic]] = {}
    reports: dict[str, dict[StatisticKind, ComparisonReport | None]] = {}
    for name, graphs in _datasets(cfg, workers).items():
        raw[name] = raw_statistics(graphs, cfg.conventions, workers, dataset=name)
        reports[name] = raw_reports(raw[name])
    write_raw_stats(out / "raw_stats.csv", [r for rows in raw.values() for r in rows])
    models = list(cfg.models)
    ad_rows, r_rows = [], []
    for kind in ALL_STATISTICS:
        reps = [reports[m][kind] for m in models]
        ad_rows.append([kind] + [math.nan if r is None else r.ad_stat for r in reps])
        r_rows.append([kind] + [None if r is None else r.pearson_r for r in reps])
    write_csv(out / "ad_table.csv", ["statistic"] + models, ad_rows)
    write_csv(out / "correlation_table.csv", ["statistic"] + models, r_rows)
    for m in models:
        for kind in ALL_STATISTICS:
            rep = reports[m][kind]
            if rep is None:
                continue
            stem = f"{m}__{kind.value}"
            write_ks_matrix(out / "ks_heatmaps" / f"{stem}.csv", rep)
            groups = size_groups(_raw_points(raw[m], kind))
            write_histogram(out / "histograms" / f"{stem}.csv", groups)
            emit_report_figures(out, stem, rep, groups, f"{m}, {kind.label}")
    _finish(out, cfg)
    return DirectResult(raw, reports)


# ---------------------------------------------------------------------------
# Adjustment comparison


@dataclass
class AdjustmentStudyResult:
    raw: dict[str, list[RawStatistic]]
    unadjusted: dict[str, dict[StatisticKind, ComparisonReport | None]]
    adjusted: dict[tuple[str, Family], dict[StatisticKind, ComparisonReport | None]]
    results: dict[tuple[str, Family], AdjustmentResult]


def adjustment_plan(cfg: StudyConfig) -> list[tuple[str, Family]]:
    plan = []
    for name in cfg.models:
        for fam in cfg.families:
            if fam is Family.HIER_BERNOULLI and not cfg.full_hier_matrix and name not in cfg.hier_datasets:
                continue
            plan.append((name, fam))
    return plan


def _ad_pair(rep: ComparisonReport | None, points) -> tuple[float, float]:
    """Standardized and raw AD for one report."""
    if rep is None:
        return math.nan, math.nan
    groups = [g for g in size_groups(points) if len(g) > 0]
    return rep.ad_stat, ad_k_sample_raw(groups)


def run_adjustment_study(cfg: StudyConfig, out_dir: str | Path, workers: int = 1) -> AdjustmentStudyResult:
    """Every dataset adjusted with every configured family, compared with the unadjusted baseline.

    The reciprocal-AD bar data uses the unstandardized A2 statistic, which is
    always positive; the standardized value is reported alongside it.
    """
    _require(cfg, StudyKind.ADJUSTMENT)
    out = Path(out_dir)
    datasets = _datasets(cfg, workers)
    raw = {name: raw_statistics(graphs, cfg.conventions, workers, dataset=name) for name, graphs in datasets.items()}
    write_raw_stats(out / "raw_stats.csv", [r for rows in raw.values() for r in rows])
    unadjusted = {name: raw_reports(rows) for name, rows in raw.items()}
    adjusted: dict[tuple[str, Family], dict[StatisticKind, ComparisonReport | None]] = {}
    results: dict[tuple[str, Family], AdjustmentResult] = {}
    for name, fam in adjustment_plan(cfg):
        seed = derive_seed(cfg.seed, f"adjust/{name}/{fam.value}")
        res = run_adjustment(datasets[name], fam, cfg.n_m, cfg.n_s, seed, cfg.gibbs, cfg.conventions,
                             workers, raw=raw[name], dataset=name)
        results[(name, fam)] = res
        adjusted[(name, fam)] = adjusted_reports(res.adjusted)
        write_adjustment(res, out / "adjusted" / f"{name}__{fam.value}")

    rows = []
    for name in cfg.models:
        for kind in ALL_STATISTICS:
            std, a2 = _ad_pair(unadjusted[name][kind], _raw_points(raw[name], kind))
            rows.append((name, "unadjusted", kind, std, a2, 1.0 / a2 if a2 > 0 else math.nan))
        for fam in cfg.families:
            if (name, fam) not in adjusted:
                continue
            for kind in ALL_STATISTICS:
                std, a2 = _ad_pair(adjusted[(name, fam)][kind], _adjusted_points(results[(name, fam)].adjusted, kind))
                rows.append((name, fam, kind, std, a2, 1.0 / a2 if a2 > 0 else math.nan))
    write_csv(out / "ad_adjusted.csv", ["dataset", "method", "statistic", "ad_stat", "ad_raw", "reciprocal_ad"], rows)

    for name in cfg.models:
        methods = ["unadjusted"] + [f.value for f in cfg.families if (name, f) in adjusted]
        series = []
        for method in methods:
            lookup = {r[2]: r[5] for r in rows if r[0] == name and getattr(r[1], "value", r[1]) == method}
            series.append((method, [lookup[k] for k in ALL_STATISTICS]))
        svg.save(out / "figures" / f"reciprocal_ad_{name}.svg",
                 svg.grouped_bar_chart([k.value for k in ALL_STATISTICS], series,
                                       f"Reciprocal AD, {name} data", "1 / A2", cap=RECIPROCAL_AD_CAP))
    _finish(out, cfg, {"plan": [[n, f.value] for n, f in adjustment_plan(cfg)]})
    return AdjustmentStudyResult(raw, unadjusted, adjusted, results)


# ---------------------------------------------------------------------------
# Feature detection


def variant_name(p_btw: float) -> str:
    return f"hier_markov_pbtw{p_btw:.2f}"


@dataclass(frozen=True)
class Separation:
    statistic: StatisticKind
    n: int
    ks_unadjusted: float
    ks_adjusted: float
    critical: float


@dataclass
class FeatureResult:
    variants: list[str]
    separation: list[Separation]
    adjustment: AdjustmentResult

    def at(self, kind: StatisticKind, n: int) -> Separation:
        for s in self.separation:
            if s.statistic is kind and s.n == n:
                return s
        raise KeyError((kind, n))


def _variant_values(rows: Iterable, variant: str, n: int, kind: StatisticKind, adjusted: bool) -> np.ndarray:
    if adjusted:
        vals = [a.z for a in rows if a.dataset == variant and a.n == n and a.statistic is kind and a.defined]
    else:
        vals = [r.value.value for r in rows
                if r.dataset == variant and r.n == n and r.value.kind is kind and r.value.defined]
    return np.asarray(vals, dtype=np.float64)


def run_feature_detection(cfg: StudyConfig, out_dir: str | Path, workers: int = 1) -> FeatureResult:
    """Hierarchical Markov variants differing in p_btw, adjusted together by one mixture.

    Both variants are pooled into a single collection before adjustment so
    the z-scores of the two variants share one reference distribution.
    """
    _require(cfg, StudyKind.FEATURE)
    out = Path(out_dir)
    base = cfg.models.get("hier_markov", study_models()["hier_markov"])
    variants = [variant_name(p) for p in cfg.feature_p_btw]
    pooled: list[tuple[str, Graph]] = []
    raw: list[RawStatistic] = []
    for p, name in zip(cfg.feature_p_btw, variants):
        params = {k: v for k, v in base.params.items() if k not in ("p_btw", "theta_btw")}
        spec = replace(base, params={**params, "p_btw": p})
        graphs = simulate_dataset(name, spec, cfg.sizes, cfg.replicates, cfg.seed, workers)
        pooled.extend(graphs)
        raw.extend(raw_statistics(graphs, cfg.conventions, workers, dataset=name))
    write_raw_stats(out / "raw_stats.csv", raw)
    seed = derive_seed(cfg.seed, f"feature/{cfg.feature_family.value}")
    res = run_adjustment(pooled, cfg.feature_family, cfg.n_m, cfg.n_s, seed, cfg.gibbs, cfg.conventions,
                         workers, raw=raw)
    # Restore the variant label on each adjusted value.
    dataset_of = {r.graph_id: r.dataset for r in raw}
    adjusted = [replace(a, dataset=dataset_of[a.graph_id]) for a in res.adjusted]
    res = replace(res, adjusted=adjusted)
    write_adjustment(res, out / "adjusted")

    quart_rows, sep = [], []
    for kind in ALL_STATISTICS:
        for form in ("unadjusted", "adjusted"):
            source = adjusted if form == "adjusted" else raw
            boxes = []
            for n in cfg.sizes:
                for v in variants:
                    x = _variant_values(source, v, n, kind, form == "adjusted")
                    boxes.append((f"{n}/{v[-4:]}", x))
                    if x.size:
                        q = np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0])
                    else:
                        q = [math.nan] * 5
                    quart_rows.append((kind, n, v, form, int(x.size), *q))
            svg.save(out / "figures" / f"box_{kind.value}_{form}.svg",
                     svg.boxplot(boxes, f"{kind.label} ({form})", "value" if form == "unadjusted" else "z"))
        for n in cfg.sizes:
            ks = {}
            sizes = None
            for form in ("unadjusted", "adjusted"):
                source = adjusted if form == "adjusted" else raw
                xs = [_variant_values(source, v, n, kind, form == "adjusted") for v in variants[:2]]
                ks[form] = ks_two_sample(*xs) if all(x.size for x in xs) else math.nan
                if form == "unadjusted":
                    sizes = [x.size for x in xs]
            crit = ks_critical_value(*sizes) if sizes and all(sizes) else math.nan
            sep.append(Separation(kind, n, ks["unadjusted"], ks["adjusted"], crit))
    write_csv(out / "quartiles.csv", ["statistic", "n", "variant", "form", "count", "min", "q1", "median", "q3", "max"],
              quart_rows)
    write_csv(out / "separation.csv", ["statistic", "n", "ks_unadjusted", "ks_adjusted", "ks_critical_1pct"],
              [(s.statistic, s.n, s.ks_unadjusted, s.ks_adjusted, s.critical) for s in sep])
    _finish(out, cfg, {"variants": variants})
    return FeatureResult(variants, sep, res)


# ---------------------------------------------------------------------------
# User data


@dataclass(frozen=True)
class SizeTrend:
    intercept: float
    slope: float
    relative_change: float  # fitted change across the observed size range, relative to the mean


@dataclass
class UserDataResult:
    graphs: list[tuple[str, Graph]]
    density_trend: SizeTrend
    degree_trend: SizeTrend
    recommendation: Family
    raw: list[RawStatistic]
    adjustments: dict[Family, AdjustmentResult]
    correlations: dict[str, dict[StatisticKind, float | None]]


def size_trend(points: Sequence[tuple[float, float]]) -> SizeTrend:
    """Least-squares line of value on size."""
    x = np.asarray([p[0] for p in points], dtype=np.float64)
    y = np.asarray([p[1] for p in points], dtype=np.float64)
    if np.unique(x).size < 2:
        return SizeTrend(float(y.mean()), math.nan, math.nan)
    slope, intercept = np.polyfit(x, y, 1)
    mean = float(y.mean())
    rel = slope * (x.max() - x.min()) / mean if mean != 0 else math.nan
    return SizeTrend(float(intercept), float(slope), float(rel))


def recommend_family(density: SizeTrend, degree: SizeTrend) -> Family:
    """Bernoulli when density is the steadier quantity across sizes, otherwise the mean-degree offset."""
    if not (math.isfinite(density.relative_change) and math.isfinite(degree.relative_change)):
        return Family.BERNOULLI
    return Family.BERNOULLI if abs(density.relative_change) <= abs(degree.relative_change) else Family.OFFSET_BERNOULLI


def _ranks(values: Sequence[float]) -> list[float]:
    """Average ranks (1 = smallest) with NaN kept as NaN."""
    arr = np.asarray(values, dtype=np.float64)
    out = np.full(arr.size, math.nan)
    ok = np.flatnonzero(~np.isnan(arr))
    order = ok[np.argsort(arr[ok], kind="stable")]
    sorted_vals = arr[order]
    i = 0
    while i < order.size:
        j = i
        while j + 1 < order.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        out[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return out.tolist()


def run_user_data(cfg: StudyConfig, collection: str | Path | None, out_dir: str | Path,
                  workers: int = 1) -> UserDataResult:
    """Raw trends, family recommendation, adjustment and size correlations for an observed collection."""
    _require(cfg, StudyKind.USER)
    source = collection if collection is not None else cfg.collection
    if source is None:
        raise ValueError("user-data study needs a collection path")
    out = Path(out_dir)
    graphs = read_collection(source)
    if len(graphs) < 2:
        raise ValueError(f"need at least 2 graphs to compare, found {len(graphs)}")
    raw = raw_statistics(graphs, cfg.conventions, workers, dataset="observed")
    write_raw_stats(out / "raw_stats.csv", raw)

    dens_pts = [(g.n, g.edge_count / math.comb(g.n, 2)) for _, g in graphs if g.n >= 2]
    deg_pts = [(g.n, 2.0 * g.edge_count / g.n) for _, g in graphs]
    density_trend, degree_trend = size_trend(dens_pts), size_trend(deg_pts)
    rec = recommend_family(density_trend, degree_trend)
    write_csv(out / "size_trends.csv", ["graph_id", "n", "density", "mean_degree"],
              [(gid, g.n, g.edge_count / math.comb(g.n, 2) if g.n >= 2 else math.nan, 2.0 * g.edge_count / g.n)
               for gid, g in graphs])
    write_csv(out / "trend_fits.csv", ["quantity", "intercept", "slope", "relative_change", "recommendation"],
              [("density", density_trend.intercept, density_trend.slope, density_trend.relative_change, rec),
               ("mean_degree", degree_trend.intercept, degree_trend.slope, degree_trend.relative_change, rec)])
    svg.save(out / "figures" / "density_vs_n.svg",
             svg.scatter(dens_pts, "Density by size", "n", "density", (density_trend.intercept, density_trend.slope)))
    svg.save(out / "figures" / "mean_degree_vs_n.svg",
             svg.scatter(deg_pts, "Mean degree by size", "n", "mean degree",
                         (degree_trend.intercept, degree_trend.slope)))

    families: list[Family] = []
    for f in cfg.user_families:
        fam = rec if f == "auto" else Family(f)
        if fam not in families:
            families.append(fam)
    n_m = min(cfg.n_m, len(graphs))
    n_s = n_m * math.ceil(cfg.n_s / n_m)
    adjustments: dict[Family, AdjustmentResult] = {}
    for fam in families:
        res = run_adjustment(graphs, fam, n_m, n_s, derive_seed(cfg.seed, f"user/{fam.value}"), cfg.gibbs,
                             cfg.conventions, workers, raw=raw, dataset="observed")
        adjustments[fam] = res
        write_adjustment(res, out / "adjusted" / fam.value)

    correlations: dict[str, dict[StatisticKind, float | None]] = {"unadjusted": {}}
    for kind in ALL_STATISTICS:
        correlations["unadjusted"][kind] = pearson_with_n(_raw_points(raw, kind))
    for fam, res in adjustments.items():
        correlations[fam.value] = {kind: pearson_with_n(_adjusted_points(res.adjusted, kind)) for kind in ALL_STATISTICS}
    methods = list(correlations)
    write_csv(out / "correlation_table.csv", ["statistic"] + methods,
              [[kind] + [correlations[m][kind] for m in methods] for kind in ALL_STATISTICS])

    rank_rows = []
    for kind in ALL_STATISTICS:
        raw_rows = [r for r in raw if r.value.kind is kind]
        forms = [("unadjusted", [r.value.value if r.value.defined else math.nan for r in raw_rows])]
        for fam, res in adjustments.items():
            zs = {a.graph_id: (a.z if a.defined else math.nan) for a in res.adjusted if a.statistic is kind}
            forms.append((fam.value, [zs[r.graph_id] for r in raw_rows]))
        for form, vals in forms:
            for r, v, rank in zip(raw_rows, vals, _ranks(vals)):
                rank_rows.append((kind, form, r.graph_id, r.n, v, rank))
    write_csv(out / "ranks.csv", ["statistic", "form", "graph_id", "n", "value", "rank"], rank_rows)
    _finish(out, cfg, {"collection": str(source), "recommendation": rec.value, "effective_n_m": n_m,
                       "effective_n_s": n_s})
    return UserDataResult(graphs, density_trend, degree_trend, rec, raw, adjustments, correlations)


def run_study(cfg: StudyConfig, out_dir: str | Path, workers: int = 1, collection: str | Path | None = None):
    if cfg.study is StudyKind.DIRECT:
        return run_direct_comparison(cfg, out_dir, workers)
    if cfg.study is StudyKind.ADJUSTMENT:
        return run_adjustment_study(cfg, out_dir, workers)
    if cfg.study is StudyKind.FEATURE:
        return run_feature_detection(cfg, out_dir, workers)
    return run_user_data(cfg, collection, out_dir, workers)
