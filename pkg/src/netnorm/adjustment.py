"""Mixture Model Adjustment: standardize statistics against a simulated mixture reference.

Component selection picks ``n_m`` observed graphs at random and fits one model
to each.  For every unique network size the reference distribution is built
from ``n_s / n_m`` draws per fitted component, and each observed statistic is
replaced by its z-score against the reference at its own size.  The
Erdos-Renyi family skips fitting altogether: its single component is the tie
probability 0.5.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .artifacts import write_csv, write_json
from .fitting import FittedParams, GibbsConfig, fit
from .generators import Family, ModelSpec, ThetaDraw, simulate
from .graph import Graph
from .parallel import pmap
from .rng import substream
from .statistics import ALL_STATISTICS, Conventions, StatisticKind, StatisticValue, compute_all

ADJUSTMENT_FAMILIES = (Family.ERDOS_RENYI, Family.BERNOULLI, Family.OFFSET_BERNOULLI, Family.HIER_BERNOULLI)
DEFAULT_N_M = 30
DEFAULT_N_S = 1020
REFERENCE_ALPHA = 10.0


class AdjustmentError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"adjustment failed during {stage}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class MixtureComponents:
    family: Family
    components: list[FittedParams]
    source_ids: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.components:
            raise ValueError("a mixture needs at least one component")
        if any(c.family is not self.family for c in self.components):
            raise ValueError("all components must share the mixture family")

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "source_ids": list(self.source_ids),
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, d: dict) -> MixtureComponents:
        return cls(Family(d["family"]), [FittedParams.from_json(c) for c in d["components"]],
                   list(d.get("source_ids", [])))


@dataclass(frozen=True)
class ReferenceSummary:
    size: int
    statistic: StatisticKind
    mean: float
    sd: float
    simulated_count: int
    dropped_undefined: int


@dataclass(frozen=True)
class RawStatistic:
    graph_id: str
    n: int
    value: StatisticValue
    dataset: str = ""


@dataclass(frozen=True)
class AdjustedValue:
    graph_id: str
    n: int
    statistic: StatisticKind
    z: float
    defined: bool
    dataset: str = ""


@dataclass
class AdjustmentResult:
    components: MixtureComponents
    summaries: list[ReferenceSummary]
    adjusted: list[AdjustedValue]
    raw: list[RawStatistic]


def select_components(n_graphs: int, n_m: int, rng: np.random.Generator) -> list[int]:
    """Uniform sample of ``n_m`` distinct collection indices."""
    if not 1 <= n_m <= n_graphs:
        raise ValueError(f"N_M must lie in [1, {n_graphs}], got {n_m}")
    return [int(i) for i in rng.choice(n_graphs, size=n_m, replace=False)]


def erdos_renyi_components() -> MixtureComponents:
    return MixtureComponents(Family.ERDOS_RENYI,
                             [FittedParams(Family.ERDOS_RENYI, {"p": 0.5, "theta_edge": 0.0}, {"fitted": False})])


def component_spec(fp: FittedParams) -> ModelSpec:
    """The generative model a fitted component contributes to the reference."""
    v = fp.values
    if fp.family is Family.ERDOS_RENYI:
        return ModelSpec(Family.ERDOS_RENYI)
    if fp.family is Family.BERNOULLI:
        return ModelSpec(Family.BERNOULLI, {"p": v["p"]})
    if fp.family is Family.OFFSET_BERNOULLI:
        return ModelSpec(Family.OFFSET_BERNOULLI, {"theta_deg": v["theta_deg"]})
    if fp.family is Family.HIER_BERNOULLI:
        return ModelSpec(
            Family.HIER_BERNOULLI,
            {"mu_within": v["mu_within"], "theta_within_sd": v["theta_within_sd"], "p_btw": v["p_btw"]},
            k_rule=max(1, int(round(v["k"]))),
            alpha=REFERENCE_ALPHA,
            theta_draw=ThetaDraw.NETWORK,
        )
    raise ValueError(f"{fp.family.value} cannot be a mixture component")


def _reference_task(task: tuple) -> np.ndarray:
    spec, j, n, draws, seed, conventions = task
    out = np.empty((draws, len(ALL_STATISTICS)))
    for d in range(draws):
        g = simulate(spec, n, substream(seed, "reference", j, n, d))
        stats = compute_all(g, conventions)
        out[d] = [s.value if s.defined else np.nan for s in stats.values()]
    return out


def simulate_reference_values(
    components: MixtureComponents,
    sizes: Sequence[int],
    n_s: int,
    seed: int,
    conventions: Conventions = Conventions(),
    workers: int = 1,
) -> dict[int, np.ndarray]:
    """Raw reference draws per size: an ``(n_s, 9)`` array, NaN where undefined.

    Draw ``d`` of component ``j`` at size ``n`` always uses the substream
    ``(seed, "reference", j, n, d)``, so values do not depend on which other
    sizes are requested or on the worker count.
    """
    n_m = len(components.components)
    if n_s < 1 or n_s % n_m:
        raise ValueError(f"N_S={n_s} must be a positive multiple of the component count {n_m}")
    sizes = sorted(set(int(n) for n in sizes))
    if not sizes:
        raise ValueError("no sizes requested")
    per = n_s // n_m
    specs = [component_spec(c) for c in components.components]
    tasks = [(specs[j], j, n, per, seed, conventions) for n in sizes for j in range(n_m)]
    results = pmap(_reference_task, tasks, workers)
    out = {}
    for idx, n in enumerate(sizes):
        out[n] = np.vstack(results[idx * n_m:(idx + 1) * n_m])
    return out


def summarize_reference(values: dict[int, np.ndarray]) -> list[ReferenceSummary]:
    summaries = []
    for n in sorted(values):
        block = values[n]
        for col, kind in enumerate(ALL_STATISTICS):
            x = block[:, col]
            x = x[~np.isnan(x)]
            dropped = block.shape[0] - x.size
            if x.size == 0:
                mean, sd = math.nan, math.nan
            else:
                mean = float(x.mean())
                sd = float(x.std(ddof=1)) if x.size > 1 else 0.0
            summaries.append(ReferenceSummary(n, kind, mean, sd, int(x.size), int(dropped)))
    return summaries


def build_reference(
    components: MixtureComponents,
    sizes: Sequence[int],
    n_s: int,
    seed: int,
    conventions: Conventions = Conventions(),
    workers: int = 1,
) -> list[ReferenceSummary]:
    return summarize_reference(simulate_reference_values(components, sizes, n_s, seed, conventions, workers))


def z_score(value: StatisticValue, summary: ReferenceSummary) -> tuple[float, bool]:
    if not value.defined or not summary.sd > 0 or not math.isfinite(summary.mean):
        return math.nan, False
    return (value.value - summary.mean) / summary.sd, True


def adjust(rows: Sequence[RawStatistic], summaries: Sequence[ReferenceSummary]) -> list[AdjustedValue]:
    """z-score every raw statistic against the reference at its own size."""
    table = {(s.size, s.statistic): s for s in summaries}
    out = []
    for r in rows:
        key = (r.n, r.value.kind)
        if key not in table:
            raise ValueError(f"no reference summary for n={r.n}, statistic={r.value.kind.value}")
        z, ok = z_score(r.value, table[key])
        out.append(AdjustedValue(r.graph_id, r.n, r.value.kind, z, ok, r.dataset))
    return out


def _stats_task(task: tuple) -> list[StatisticValue]:
    g, conventions = task
    return list(compute_all(g, conventions).values())


def raw_statistics(
    graphs: Sequence[tuple[str, Graph]],
    conventions: Conventions = Conventions(),
    workers: int = 1,
    dataset: str = "",
) -> list[RawStatistic]:
    results = pmap(_stats_task, [(g, conventions) for _, g in graphs], workers)
    return [RawStatistic(gid, g.n, v, dataset) for (gid, g), vals in zip(graphs, results) for v in vals]


def _fit_task(task: tuple) -> FittedParams:
    family, g, seed, j, gibbs = task
    return fit(family, g, substream(seed, "fit", j), gibbs)


def fit_components(
    graphs: Sequence[Graph],
    family: Family,
    n_m: int,
    seed: int,
    gibbs: GibbsConfig | None = None,
    workers: int = 1,
) -> MixtureComponents:
    family = Family(family)
    if family is Family.ERDOS_RENYI:
        return erdos_renyi_components()
    ids = select_components(len(graphs), n_m, substream(seed, "select"))
    fits = pmap(_fit_task, [(family, graphs[i], seed, j, gibbs) for j, i in enumerate(ids)], workers)
    return MixtureComponents(family, fits, ids)


def run_adjustment(
    graphs: Sequence[tuple[str, Graph]],
    family: Family,
    n_m: int = DEFAULT_N_M,
    n_s: int = DEFAULT_N_S,
    seed: int = 0,
    gibbs: GibbsConfig | None = None,
    conventions: Conventions = Conventions(),
    workers: int = 1,
    raw: Sequence[RawStatistic] | None = None,
    dataset: str = "",
) -> AdjustmentResult:
    """Select, fit, simulate the reference at each unique size, and z-score.

    ``raw`` may carry precomputed statistics for ``graphs`` to skip recomputing them.
    """
    family = Family(family)
    if family not in ADJUSTMENT_FAMILIES:
        raise ValueError(f"{family.value} is not an adjustment family")
    if not graphs:
        raise ValueError("empty collection")
    if family is not Family.ERDOS_RENYI:
        if not 1 <= n_m <= len(graphs):
            raise ValueError(f"N_M must lie in [1, {len(graphs)}], got {n_m}")
        if n_s % n_m:
            raise ValueError(f"N_S={n_s} is not divisible by N_M={n_m}")
    stage = "statistics"
    try:
        if raw is None:
            raw = raw_statistics(graphs, conventions, workers, dataset)
        stage = "fitting"
        components = fit_components([g for _, g in graphs], family, n_m, seed, gibbs, workers)
        stage = "reference simulation"
        sizes = sorted({g.n for _, g in graphs})
        summaries = build_reference(components, sizes, n_s, seed, conventions, workers)
        stage = "standardization"
        adjusted = adjust(raw, summaries)
    except Exception as exc:
        raise AdjustmentError(stage, exc) from exc
    return AdjustmentResult(components, summaries, adjusted, list(raw))


def write_adjustment(result: AdjustmentResult, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = [write_json(out_dir / "components.json", result.components.to_json())]
    paths.append(write_csv(
        out_dir / "reference.csv",
        ["size", "statistic", "mean", "sd", "simulated_count", "dropped_undefined"],
        [(s.size, s.statistic, s.mean, s.sd, s.simulated_count, s.dropped_undefined) for s in result.summaries],
    ))
    paths.append(write_csv(
        out_dir / "adjusted.csv",
        ["dataset", "graph_id", "n", "statistic", "z", "defined"],
        [(a.dataset, a.graph_id, a.n, a.statistic, a.z, a.defined) for a in result.adjusted],
    ))
    return paths
