"""Batch command-line front end.

Commands::

    lipkit extend   --anchors A.csv [--queries Q.csv] --lambda auto ... --out out.csv
    lipkit envelope --anchors A.csv --kappa 1[,2,...] ... --out out.csv
    lipkit approx   {monotone|uniform|fine|insert|small} ... --out out.csv
    lipkit pou      --cover C.json [--domain D.json | --anchors A.csv] --out out.csv
    lipkit check    --anchors A.csv [--delta D --lip-bound K] --out report.json

Exit codes: 0 on success, 2 when a validated invariant fails (the message
names it and its witness), 1 on I/O trouble.  Identical configuration and
inputs produce byte-identical outputs.  ``--config FILE`` supplies any flag
from JSON; explicit flags win.  ``--figure PATH`` additionally renders the
emitted series as a PNG next to the delimited output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import approx as approx_mod
from . import fileio
from .envelope import EnvelopeFunction, EnvelopeSpec
from .errors import ArgumentError, LipkitError
from .extension import MIDPOINT, ExtensionSpec, MWExtension
from .metric import AnchoredFunction, MetricDomain
from .partition import build_partition, carrier_domain_values
from .verify import DEFAULT_PAIR_BUDGET, build_report

APPROX_METHODS = ("monotone", "uniform", "fine", "insert", "small")
EXTEND_MODES = ("all", "minimal", "maximal", "midpoint", "bounded", "local")


@dataclass
class RunConfig:
    """One resolved CLI invocation."""

    command: str
    out: str
    anchors: str | None = None
    domain: str | None = None
    queries: str | None = None
    cover: str | None = None
    seed: int = 0
    # extend
    lam: str | None = None
    mode: str = "all"
    bound: float | None = None
    # envelope
    kappa: str | None = None
    side: str = "lower"
    window: float | None = None
    # approx
    method: str | None = None
    eps: float | None = None
    spacing: float | None = None
    delta: float | None = None
    k: int | None = None
    n: int | None = None
    tol: str | None = None
    below: str | None = None
    above: str | None = None
    # check
    radius: float | None = None
    lip_bound: float | None = None
    pair_budget: int | None = None
    # reporting
    figure: str | None = None
    plot_data: str | None = None


def _load_inputs(config: RunConfig, need_anchors: bool = True):
    domain: MetricDomain | None = None
    if config.domain:
        domain = fileio.read_domain_json(config.domain)
    source = None
    if config.anchors:
        source = fileio.read_anchor_csv(config.anchors, domain)
        domain = source.domain
    elif need_anchors:
        raise ArgumentError("this command needs --anchors")
    if domain is None:
        raise ArgumentError("this command needs --anchors or --domain")
    if config.queries:
        queries = fileio.read_query_csv(config.queries, domain)
    elif domain.is_explicit:
        queries = np.arange(domain.n_points)
    elif source is not None:
        queries = source.anchors
    else:
        raise ArgumentError("this command needs --queries on a continuum domain")
    return domain, source, queries


def _query_axis(domain: MetricDomain, queries) -> np.ndarray:
    """A scalar x-axis for plots: the coordinate in 1-d, the position otherwise."""
    if not domain.is_explicit and domain.dim == 1:
        return np.asarray(queries, dtype=float).ravel()
    return np.arange(np.asarray(queries).shape[0], dtype=float)


def _emit_series(config: RunConfig, domain, queries, series: dict[str, np.ndarray],
                 ylabel: str) -> None:
    if not (config.plot_data or config.figure):
        return
    xs = _query_axis(domain, queries)
    rows = fileio.plot_rows(xs, series)
    if config.plot_data:
        fileio.write_csv(config.plot_data, ["x", "series", "value"], rows)
    if config.figure:
        from . import plotting

        plotting.save_series_figure(rows, config.figure, title=config.command,
                                    ylabel=ylabel)


def _resolve_lambda_flag(value: str):
    if value in ("auto", "per-anchor", "per_anchor"):
        return "auto" if value == "auto" else "per_anchor"
    try:
        return float(value)
    except ValueError:
        raise ArgumentError(
            f"--lambda must be a number, 'auto', or 'per-anchor', got {value!r}"
        ) from None


def _cmd_extend(config: RunConfig) -> None:
    domain, source, queries = _load_inputs(config)
    if config.mode == "local":
        _cmd_extend_local(config, domain, source, queries)
        return
    lam = _resolve_lambda_flag(config.lam if config.lam is not None else "auto")
    spec = ExtensionSpec(source, MIDPOINT, lam, config.bound)
    ext = MWExtension(spec)
    pts = queries

    want = config.mode
    if want == "bounded" and config.bound is None:
        raise ArgumentError("extend --mode bounded needs --bound M")
    lo_vals = ext.minimal(pts)
    hi_vals = ext.maximal(pts)
    lo = lo_vals if want in ("all", "minimal") else None
    hi = hi_vals if want in ("all", "maximal") else None
    mid = (lo_vals + hi_vals) / 2.0 if want in ("all", "midpoint") else None
    bounded = None
    if config.bound is not None and want in ("all", "bounded"):
        bounded = MWExtension(
            ExtensionSpec(source, "bounded_range", lam, config.bound)
        ).batch(pts)

    if spec.lambda_kind == "constant":
        lam_repr = fileio.fmt(float(spec.lambdas[0]))
    else:
        lam_repr = "per-anchor"
    rows = []
    for i in range(np.asarray(pts).shape[0]):
        rows.append([
            i,
            None if lo is None else lo[i],
            None if hi is None else hi[i],
            None if mid is None else mid[i],
            None if bounded is None else bounded[i],
            lam_repr,
        ])
    fileio.write_csv(config.out,
                     ["query_id", "phi_minus", "phi_plus", "mid", "bounded", "lambda_used"],
                     rows)
    series = {}
    if lo is not None:
        series["phi_minus"] = lo
    if hi is not None:
        series["phi_plus"] = hi
    if mid is not None:
        series["mid"] = mid
    if bounded is not None:
        series["bounded"] = bounded
    _emit_series(config, domain, queries, series, ylabel="extension")


def _cmd_extend_local(config: RunConfig, domain, source, queries) -> None:
    """Locally Lipschitz pipeline: per-piece extensions glued by a partition.

    The anchor cover comes from ``--cover`` (subset sets over anchor
    positions); without one, a single piece spans every anchor.  With
    ``--bound M`` the blend is clamped into ``(-M, M)``.
    """
    from .blend import extend_locally_lipschitz, extend_range_bounded

    if config.cover:
        subsets = fileio.read_subset_cover_json(config.cover)
    else:
        subsets = [tuple(range(source.n))]
    mid = bounded = None
    if config.bound is not None:
        fn = extend_range_bounded(source, subsets, config.bound)
        bounded = fn.batch(queries)
    else:
        fn = extend_locally_lipschitz(source, subsets)
        mid = fn.batch(queries)
    rows = []
    for i in range(np.asarray(queries).shape[0]):
        rows.append([
            i, None, None,
            None if mid is None else mid[i],
            None if bounded is None else bounded[i],
            "per-piece",
        ])
    fileio.write_csv(config.out,
                     ["query_id", "phi_minus", "phi_plus", "mid", "bounded", "lambda_used"],
                     rows)
    series = {}
    if mid is not None:
        series["mid"] = mid
    if bounded is not None:
        series["bounded"] = bounded
    _emit_series(config, domain, queries, series, ylabel="extension")


def _cmd_envelope(config: RunConfig) -> None:
    domain, source, queries = _load_inputs(config)
    if config.kappa is None:
        raise ArgumentError("envelope needs --kappa (one value or a comma list)")
    kappas = [float(tok) for tok in str(config.kappa).split(",") if tok.strip()]
    if not kappas:
        raise ArgumentError("envelope needs at least one --kappa value")
    rows = []
    series = {}
    for kap in kappas:
        spec = EnvelopeSpec(source, kap, config.side, config.window)
        values, args = EnvelopeFunction(spec).batch_with_args(queries)
        series[f"kappa={fileio.fmt(kap)}"] = values
        for i in range(values.shape[0]):
            rows.append([i, kap, values[i], int(args[i])])
    fileio.write_csv(config.out, ["query_id", "kappa", "value", "argmin_anchor"], rows)
    _emit_series(config, domain, queries, series, ylabel="envelope")


def _cmd_pou(config: RunConfig) -> None:
    domain, source, queries = _load_inputs(config, need_anchors=False)
    if not config.cover:
        raise ArgumentError("pou needs --cover")
    cover = fileio.read_cover_json(config.cover, domain, carrier=source)
    partition = build_partition(cover)
    rows = partition.table(queries)
    fileio.write_csv(config.out, ["point_id", "set_index", "eta_n", "gamma_n", "xi"],
                     [[i, k + 1, e, g, x] for (i, k, e, g, x) in rows])
    if config.plot_data or config.figure:
        xi = partition.xi(queries)
        series = {f"xi_{k + 1}": xi[:, k] for k in range(partition.size)}
        _emit_series(config, domain, queries, series, ylabel="weight")


def _phi_at_queries(source: AnchoredFunction, domain, queries) -> list[float | None]:
    """Source values at queries where known (anchor match), else None."""
    if domain.is_explicit and source.n == domain.n_points:
        vals = carrier_domain_values(source, domain)
        return [float(vals[int(q)]) for q in np.asarray(queries)]
    out = []
    for q in np.asarray(queries):
        idx = source.index_of(q)
        out.append(None if idx is None else float(source.values[idx]))
    return out


def _approx_rows(config, domain, queries, values, phi, bounds):
    rows = []
    for i in range(len(values)):
        p = phi[i]
        err = None if p is None else abs(values[i] - p)
        rows.append([i, values[i], p, err, None if bounds is None else bounds[i]])
    fileio.write_csv(config.out, ["query_id", "value", "phi", "abs_err", "bound"], rows)
    series = {"value": np.asarray(values, dtype=float)}
    if all(p is not None for p in phi):
        series["phi"] = np.asarray([float(p) for p in phi])
        series["abs_err"] = np.abs(series["value"] - series["phi"])
    _emit_series(config, domain, queries, series, ylabel="value")


def _cmd_approx(config: RunConfig) -> None:
    method = config.method
    if method not in APPROX_METHODS:
        raise ArgumentError(f"approx method must be one of {APPROX_METHODS}, got {method!r}")

    if method == "insert":
        if not (config.below and config.above):
            raise ArgumentError("approx insert needs --below and --above anchor files")
        domain = fileio.read_domain_json(config.domain) if config.domain else None
        below = fileio.read_anchor_csv(config.below, domain)
        above = fileio.read_anchor_csv(config.above, below.domain)
        domain = below.domain
        queries = (fileio.read_query_csv(config.queries, domain) if config.queries
                   else below.anchors)
        if config.spacing is None:
            raise ArgumentError("approx insert needs --spacing for the level grid")
        lo = float(below.values.min())
        hi = float(above.values.max())
        count = int(math.ceil((hi - lo) / config.spacing)) + 1
        grid = approx_mod.LevelGrid(lo + config.spacing * np.arange(1, count),
                                    config.spacing)
        fn = approx_mod.insert_between(below, above, grid)
        values = fn.batch(queries)
        phi = _phi_at_queries(below, domain, queries)
        bounds = _phi_at_queries(above, domain, queries)
        _approx_rows(config, domain, queries, values, phi, bounds)
        return

    domain, source, queries = _load_inputs(config)

    if method == "monotone":
        if config.n is None:
            raise ArgumentError("approx monotone needs --n (the envelope rate)")
        fn = approx_mod.monotone_approximation(source, [config.n])[0]
        values = fn.batch(queries)
        bounds = None
    elif method == "uniform":
        if config.eps is None:
            raise ArgumentError("approx uniform needs --eps")
        grid = approx_mod.LevelGrid.for_values(source.values, config.eps, config.spacing)
        fn = approx_mod.uniform_approximation(source, grid)
        values = fn.batch(queries)
        bounds = [config.eps] * len(values)
    elif method == "fine":
        if config.tol:
            tol = fileio.read_anchor_csv(config.tol, domain)
        elif config.eps is not None:
            tol = config.eps
        else:
            raise ArgumentError("approx fine needs --tol FILE or --eps")
        fn = approx_mod.fine_approximation(source, tol)
        values = fn.batch(queries)
        if isinstance(tol, AnchoredFunction):
            bounds = _phi_at_queries(tol, domain, queries)
        else:
            bounds = [tol] * len(values)
    else:  # small
        if config.eps is None or config.delta is None:
            raise ArgumentError("approx small needs --eps and --delta")
        k = config.k if config.k is not None else int(math.floor(config.eps / config.delta)) + 1
        spec = approx_mod.SmallScaleSpec(source, config.delta, k, config.eps)
        fn = approx_mod.small_scale_approximation(source, spec)
        values = fn.batch(queries)
        bounds = [config.eps] * len(values)

    phi = _phi_at_queries(source, domain, queries)
    _approx_rows(config, domain, queries, values, phi, bounds)


def _cmd_check(config: RunConfig) -> None:
    domain, source, queries = _load_inputs(config)
    small = None
    if config.delta is not None or config.lip_bound is not None:
        if config.delta is None or config.lip_bound is None:
            raise ArgumentError("small-scale checks need both --delta and --lip-bound")
        small = (config.delta, config.lip_bound)
    budget = config.pair_budget if config.pair_budget is not None else DEFAULT_PAIR_BUDGET
    report = build_report(
        source,
        radius=config.radius,
        small_scale=small,
        pair_budget=budget,
        seed=config.seed,
    )
    fileio.write_json(config.out, report.to_json())
    if config.figure and report.pointwise:
        from . import plotting

        plotting.save_modulus_figure(report.pointwise, config.figure)


_COMMANDS = {
    "extend": _cmd_extend,
    "envelope": _cmd_envelope,
    "approx": _cmd_approx,
    "pou": _cmd_pou,
    "check": _cmd_check,
}


def run(config: RunConfig) -> int:
    """Execute one resolved invocation; returns the process exit code."""
    try:
        _COMMANDS[config.command](config)
    except LipkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lipkit",
        description="Lipschitz envelopes, extensions, partitions of unity, and approximations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def shared(p: argparse.ArgumentParser) -> None:
        p.add_argument("--anchors", help="anchor CSV (x1..xd,value[,lambda] or label,value[,lambda])")
        p.add_argument("--domain", help="explicit-domain JSON (labels + matrix)")
        p.add_argument("--queries", help="query CSV (x1..xd or label)")
        p.add_argument("--out", help="output path (CSV, or JSON for check)")
        p.add_argument("--seed", type=int, help="seed recorded for subsampled scans")
        p.add_argument("--config", help="JSON file supplying any of these options")
        p.add_argument("--figure", help="also render a PNG figure to this path")
        p.add_argument("--plot-data", dest="plot_data", help="also write long-format x,series,value CSV")

    p = sub.add_parser("extend", help="extremal or locally-Lipschitz extensions")
    shared(p)
    p.add_argument("--lambda", dest="lam", help="number, 'auto', or 'per-anchor'")
    p.add_argument("--mode", choices=EXTEND_MODES, help="columns to fill (default all)")
    p.add_argument("--bound", type=float, help="range bound M for the bounded column")
    p.add_argument("--cover", help="anchor-subset cover JSON for --mode local")

    p = sub.add_parser("envelope", help="lower/upper envelopes")
    shared(p)
    p.add_argument("--kappa", help="rate, or comma-separated sweep of rates")
    p.add_argument("--side", choices=("lower", "upper"), help="envelope side (default lower)")
    p.add_argument("--window", type=float, help="restrict the scan to anchors within this radius")

    p = sub.add_parser("approx", help="approximation pipelines")
    p.add_argument("method", choices=APPROX_METHODS)
    shared(p)
    p.add_argument("--eps", type=float, help="tolerance")
    p.add_argument("--spacing", type=float, help="level grid spacing")
    p.add_argument("--delta", type=float, help="small-scale window radius")
    p.add_argument("--k", type=int, help="small-scale rate")
    p.add_argument("--n", type=int, help="monotone approximation rate")
    p.add_argument("--tol", help="anchored tolerance CSV for the fine method")
    p.add_argument("--below", help="lower anchored function CSV for insertion")
    p.add_argument("--above", help="upper anchored function CSV for insertion")

    p = sub.add_parser("pou", help="partition-of-unity tables")
    shared(p)
    p.add_argument("--cover", help="cover JSON")

    p = sub.add_parser("check", help="empirical Lipschitz report (JSON)")
    shared(p)
    p.add_argument("--radius", type=float, help="pointwise modulus radius per sample")
    p.add_argument("--delta", type=float, help="small-scale check radius")
    p.add_argument("--lip-bound", dest="lip_bound", type=float, help="small-scale check constant")
    p.add_argument("--pair-budget", dest="pair_budget", type=int,
                   help="pairs scanned before deterministic subsampling")

    return parser


def parse_config(argv=None) -> tuple[RunConfig, argparse.ArgumentParser]:
    parser = build_parser()
    ns = parser.parse_args(argv)
    values = {k: v for k, v in vars(ns).items() if v is not None and k != "config"}
    if getattr(ns, "config", None):
        try:
            from_file = json.loads(Path(ns.config).read_text())
        except OSError as exc:
            parser.exit(1, f"i/o error: {exc}\n")
        for key, value in from_file.items():
            key = key.replace("-", "_")
            values.setdefault(key, value)
    if "mode" not in values:
        values["mode"] = "all"
    if "side" not in values:
        values["side"] = "lower"
    if "seed" not in values:
        values["seed"] = 0
    if not values.get("out"):
        parser.error("--out is required")
    allowed = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(values) - allowed)
    if unknown:
        parser.error(f"unknown config option(s): {', '.join(unknown)}")
    config = RunConfig(**values)
    return config, parser


def main(argv=None) -> int:
    config, _ = parse_config(argv)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
