"""``netnorm`` command line: simulate, stats, fit, adjust, compare and study.

Exit codes: 0 success, 1 internal error, 2 usage or precondition error.
"""
from __future__ import annotations

import functools
import math
import sys
from collections import defaultdict
from pathlib import Path
from typing import Any, Callable

import click

from .adjustment import (
    ADJUSTMENT_FAMILIES,
    DEFAULT_N_M,
    DEFAULT_N_S,
    AdjustmentError,
    AdjustmentResult,
    RawStatistic,
    adjust,
    build_reference,
    erdos_renyi_components,
    raw_statistics,
    run_adjustment,
    write_adjustment,
)
from .artifacts import read_csv, write_json, write_manifest
from .compare import SampleGroup, build_report
from .config import Settings, apply_overrides, load_config, section
from .experiments import (
    StudyKind,
    conventions_from_settings,
    emit_report_figures,
    gibbs_from_settings,
    models_from_settings,
    run_study,
    simulate_dataset,
    smoke_config,
    study_config_from_settings,
    write_raw_stats,
    write_report,
)
from .fitting import FITTABLE, fit
from .generators import Family, ModelSpec
from .io import EDGE_SUFFIX, read_collection, write_edge_list
from .parallel import pmap
from .rng import resolve_seed, substream
from .statistics import ALL_STATISTICS, StatisticKind, StatisticValue

EXIT_INTERNAL = 1
EXIT_USAGE = 2


class PreconditionError(ValueError):
    """Input that is well formed but cannot be processed as asked."""


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    raise click.exceptions.Exit(code)


def guarded(fn: Callable) -> Callable:
    """Map exceptions onto exit codes."""

    @functools.wraps(fn)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return fn(*args, **kwargs)
        except (click.exceptions.Exit, click.ClickException, click.exceptions.Abort):
            raise
        except AdjustmentError as exc:
            if isinstance(exc.cause, ValueError):
                _fail(EXIT_USAGE, str(exc))
            _fail(EXIT_INTERNAL, str(exc))
        except (ValueError, KeyError, OSError) as exc:
            _fail(EXIT_USAGE, str(exc))
        except Exception as exc:  # noqa: BLE001
            _fail(EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")

    return wrapper


class Context:
    def __init__(self, seed: int, workers: int, out: Path, settings: dict[str, str]):
        self.seed = seed
        self.workers = workers
        self.out = out
        self.settings = settings

    def section(self, name: str) -> Settings:
        return Settings(section(self.settings, name))


def _family(text: str) -> Family:
    try:
        return Family(text.strip().lower().replace("-", "_"))
    except ValueError:
        choices = ", ".join(f.value for f in Family)
        raise PreconditionError(f"unknown family {text!r} (choose from {choices})") from None


def _int_list(text: str) -> list[int]:
    return Settings({"v": text}).int_list("v")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--seed", type=int, default=None, help="Master seed (falls back to NETNORM_SEED, then a fixed default).")
@click.option("--workers", type=int, default=1, show_default=True, help="Worker processes.")
@click.option("--out", "out", type=click.Path(file_okay=False, path_type=Path), default=Path("netnorm-out"),
              show_default=True, help="Output directory.")
@click.option("--config", "config", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Flat key = value config file.")
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override a config key.")
@click.pass_context
def main(ctx: click.Context, seed: int | None, workers: int, out: Path, config: Path | None,
         overrides: tuple[str, ...]) -> None:
    """Size-aware comparison of network statistics."""
    if workers < 1:
        raise click.BadParameter("must be >= 1", param_hint="--workers")
    try:
        settings = apply_overrides(load_config(config), overrides)
        seed = resolve_seed(seed if seed is not None else Settings(settings).int("seed"))
    except ValueError as exc:
        _fail(EXIT_USAGE, str(exc))
    if not 0 <= seed < 2 ** 64:
        _fail(EXIT_USAGE, "seed must be an unsigned 64-bit integer")
    ctx.obj = Context(seed, workers, out, settings)


# ---------------------------------------------------------------------------


def _resolve_model(c: Context, name: str | None, family: str | None, params: tuple[str, ...]) -> tuple[str, ModelSpec]:
    if family is not None:
        values = {}
        for item in params:
            key, sep, value = item.partition("=")
            if not sep:
                raise PreconditionError(f"--param must be key=value, got {item!r}")
            values[key.strip()] = float(value)
        fam = _family(family)
        return name or fam.value, ModelSpec(fam, values)
    models = models_from_settings(c.settings)
    if name is None:
        raise PreconditionError("give --model NAME or --family FAMILY")
    if name not in models:
        raise PreconditionError(f"unknown model {name!r} (known: {', '.join(sorted(models))})")
    return name, models[name]


@main.command()
@click.option("--model", "model", default=None, help="Named model (built-in or model.<name>.* in the config).")
@click.option("--family", default=None, help="Ad-hoc model family instead of a named model.")
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE", help="Family parameter.")
@click.option("--sizes", default=None, help="Comma list or range such as 20..100:10.")
@click.option("--replicates", type=int, default=None, help="Graphs per size.")
@click.pass_obj
@guarded
def simulate(c: Context, model: str | None, family: str | None, params: tuple[str, ...], sizes: str | None,
             replicates: int | None) -> None:
    """Write one edge-list file per simulated graph."""
    s = c.section("simulate")
    name, spec = _resolve_model(c, model or s.str("model"), family, params)
    size_list = _int_list(sizes) if sizes else s.int_list("sizes", [20])
    reps = replicates if replicates is not None else s.int("replicates", 1)
    if reps < 1 or not size_list or any(n < 1 for n in size_list):
        raise PreconditionError("need replicates >= 1 and positive sizes")
    graphs = simulate_dataset(name, spec, size_list, reps, c.seed, c.workers)
    c.out.mkdir(parents=True, exist_ok=True)
    for gid, g in graphs:
        write_edge_list(g, c.out / f"{gid}{EDGE_SUFFIX}")
    write_manifest(c.out, {"command": "simulate", "model": name, "spec": spec.to_dict(), "sizes": size_list,
                           "replicates": reps, "substream": "dataset/<model>, n, r"}, c.seed)
    click.echo(f"wrote {len(graphs)} graphs to {c.out}")


@main.command()
@click.argument("collection", type=click.Path(exists=True, path_type=Path))
@click.option("--closeness", default=None, help="cap_n or largest_component.")
@click.option("--path-length", "path_length", default=None, help="mean_reachable or sum_over_n_minus_one.")
@click.option("--dataset", default=None, help="Dataset label for the rows (default: collection name).")
@click.pass_obj
@guarded
def stats(c: Context, collection: Path, closeness: str | None, path_length: str | None, dataset: str | None) -> None:
    """Compute all statistics for every graph of a collection."""
    settings = dict(c.settings)
    if closeness:
        settings["stats.closeness"] = closeness
    if path_length:
        settings["stats.path_length"] = path_length
    conventions = conventions_from_settings(settings)
    graphs = read_collection(collection)
    rows = raw_statistics(graphs, conventions, c.workers, dataset=dataset or collection.stem)
    path = write_raw_stats(c.out / "raw_stats.csv", rows)
    write_manifest(c.out, {"command": "stats", "collection": str(collection),
                           "closeness": conventions.closeness.value,
                           "path_length": conventions.path_length.value}, c.seed)
    click.echo(f"wrote {len(rows)} rows to {path}")


def _fit_task(task: tuple):
    family, g, seed, idx, gibbs = task
    return fit(family, g, substream(seed, "fit", idx), gibbs)


@main.command("fit")
@click.argument("collection", type=click.Path(exists=True, path_type=Path))
@click.option("--family", default=None, help="bernoulli, offset_bernoulli or hier_bernoulli.")
@click.pass_obj
@guarded
def fit_cmd(c: Context, collection: Path, family: str | None) -> None:
    """Fit one model per graph and write fits.json."""
    fam = _family(family or c.section("fit").str("family", Family.BERNOULLI.value))
    if fam not in FITTABLE:
        raise PreconditionError(f"{fam.value} cannot be fitted (choose from {', '.join(f.value for f in FITTABLE)})")
    gibbs = gibbs_from_settings(c.settings)
    graphs = read_collection(collection)
    fits = pmap(_fit_task, [(fam, g, c.seed, i, gibbs) for i, (_, g) in enumerate(graphs)], c.workers)
    write_json(c.out / "fits.json", {gid: f.to_json() for (gid, _), f in zip(graphs, fits)})
    write_manifest(c.out, {"command": "fit", "collection": str(collection), "family": fam.value}, c.seed)
    click.echo(f"fitted {len(fits)} graphs")


def _raw_rows_from_csv(path: Path) -> list[RawStatistic]:
    rows = read_csv(path)
    need = {"graph_id", "n", "statistic", "value", "defined"}
    if not rows or not need <= set(rows[0]):
        raise PreconditionError(f"{path}: expected columns {sorted(need)}")
    out = []
    for i, r in enumerate(rows, start=2):
        try:
            kind = StatisticKind(r["statistic"])
            defined = r["defined"].strip().lower() == "true"
            value = StatisticValue(kind, float(r["value"]), defined) if defined else StatisticValue.undefined(kind)
            out.append(RawStatistic(r["graph_id"], int(r["n"]), value, r.get("dataset", "")))
        except ValueError as exc:
            raise PreconditionError(f"{path}:{i}: {exc}") from None
    return out


@main.command("adjust")
@click.argument("source", type=click.Path(exists=True, path_type=Path))
@click.option("--family", default=None, help="erdos_renyi, bernoulli, offset_bernoulli or hier_bernoulli.")
@click.option("--n-m", "n_m", type=int, default=None, help=f"Mixture components (default {DEFAULT_N_M}).")
@click.option("--n-s", "n_s", type=int, default=None, help=f"Reference draws per size (default {DEFAULT_N_S}).")
@click.pass_obj
@guarded
def adjust_cmd(c: Context, source: Path, family: str | None, n_m: int | None, n_s: int | None) -> None:
    """Mixture Model Adjustment of a collection (or of a raw_stats.csv for erdos_renyi)."""
    s = c.section("adjust")
    fam = _family(family or s.str("family", Family.BERNOULLI.value))
    if fam not in ADJUSTMENT_FAMILIES:
        raise PreconditionError(f"{fam.value} is not an adjustment family")
    n_m = n_m if n_m is not None else s.int("n_m", DEFAULT_N_M)
    n_s = n_s if n_s is not None else s.int("n_s", DEFAULT_N_S)
    conventions = conventions_from_settings(c.settings)
    if source.is_file() and source.suffix == ".csv":
        if fam is not Family.ERDOS_RENYI:
            raise PreconditionError("a statistics CSV can only be adjusted with erdos_renyi; other families "
                                    "must fit the graphs themselves")
        raw = _raw_rows_from_csv(source)
        components = erdos_renyi_components()
        summaries = build_reference(components, sorted({r.n for r in raw}), n_s, c.seed, conventions, c.workers)
        result = AdjustmentResult(components, summaries, adjust(raw, summaries), raw)
    else:
        graphs = read_collection(source)
        result = run_adjustment(graphs, fam, n_m, n_s, c.seed, gibbs_from_settings(c.settings), conventions,
                                c.workers, dataset=source.stem)
    write_adjustment(result, c.out)
    write_manifest(c.out, {"command": "adjust", "source": str(source), "family": fam.value, "n_m": n_m,
                           "n_s": n_s}, c.seed)
    click.echo(f"adjusted {len(result.adjusted)} values")


@main.command("compare")
@click.argument("stats_csv", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.pass_obj
@guarded
def compare_cmd(c: Context, stats_csv: Path) -> None:
    """KS matrices, k-sample AD and size correlation per statistic, grouped by n."""
    rows = read_csv(stats_csv)
    if not rows:
        raise PreconditionError(f"{stats_csv}: no rows")
    column = "value" if "value" in rows[0] else "z" if "z" in rows[0] else None
    if column is None or not {"n", "statistic"} <= set(rows[0]):
        raise PreconditionError(f"{stats_csv}: need n, statistic and value (or z) columns")
    by_key: dict[tuple[str, str], dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for i, r in enumerate(rows, start=2):
        try:
            defined = r.get("defined", "true").strip().lower() == "true"
            value = float(r[column]) if defined else math.nan
            by_key[(r.get("dataset", ""), r["statistic"])][int(r["n"])].append(value)
        except (ValueError, TypeError) as exc:
            raise PreconditionError(f"{stats_csv}:{i}: {exc}") from None
    order = {k.value: i for i, k in enumerate(ALL_STATISTICS)}
    keys = sorted(by_key, key=lambda k: (k[0], order.get(k[1], len(order)), k[1]))
    reports = []
    for dataset, stat in keys:
        groups = [SampleGroup.from_values(n, v) for n, v in sorted(by_key[(dataset, stat)].items())]
        groups = [g for g in groups if len(g) > 0]
        if len(groups) < 2:
            raise PreconditionError(f"statistic {stat!r}{' in ' + dataset if dataset else ''} has "
                                    f"{len(groups)} size group(s); comparison needs at least 2")
        rep = build_report(groups, stat)
        reports.append((dataset, rep))
        stem = f"{dataset}__{stat}" if dataset else stat
        emit_report_figures(c.out, stem, rep, groups, f"{dataset} {stat}".strip())
    write_report(c.out / "report.csv", reports)
    write_manifest(c.out, {"command": "compare", "input": str(stats_csv), "column": column}, c.seed)
    click.echo(f"compared {len(reports)} statistics")


@main.command("study")
@click.option("--kind", default=None, help="direct, adjustment, feature or user (else study.kind).")
@click.option("--smoke", is_flag=True, help="Use the reduced smoke configuration.")
@click.option("--collection", type=click.Path(exists=True, path_type=Path), default=None,
              help="Observed collection for the user study.")
@click.pass_obj
@guarded
def study_cmd(c: Context, kind: str | None, smoke: bool, collection: Path | None) -> None:
    """Run a full study and write its artifacts."""
    if smoke:
        kind = kind or c.section("study").str("kind")
        if kind is None:
            raise PreconditionError("--smoke needs --kind or study.kind")
        cfg = smoke_config(kind, c.seed)
    else:
        cfg = study_config_from_settings(c.settings, c.seed, kind)
    if cfg.study is StudyKind.USER and collection is None and cfg.collection is None:
        raise PreconditionError("the user study needs --collection or study.collection")
    run_study(cfg, c.out, c.workers, collection)
    click.echo(f"{cfg.study.value} study written to {c.out}")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
