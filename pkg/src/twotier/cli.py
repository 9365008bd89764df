"""Batch front end: validate configs, run outage campaigns, plan intensities.

Subcommands: validate, analyze, simulate, compare, plan, sweep, gap.
Campaign CSV output is deterministic for a fixed (config, seed); plot
emission writes the data CSV (without the timing column) plus one
renderer-agnostic description and one gnuplot script per figure family.

The environment variable TWOTIER_QUADRATURE may override quadrature
settings for sensitivity runs, e.g.
``TWOTIER_QUADRATURE="hermite_nodes=64,disk_radial=48"``.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

from . import analytic, montecarlo, planner
from .analytic import TypicalQuery
from .config_io import config_hash, load_config
from .model import AccessMode, NetworkConfig, validate
from .quadrature import DEFAULT_SPEC, QuadratureSpec

CSV_SCHEMA = ("# twotier sweep v1: config,query,T,axis,value,engine,"
              "outage,ci95,trials,error")

AXES = ("lambda", "mu", "T", "exclusion_radius", "qp_ratio_db", "alpha", "n")


def quadrature_from_env(base: QuadratureSpec = DEFAULT_SPEC) -> QuadratureSpec:
    raw = os.environ.get("TWOTIER_QUADRATURE", "").strip()
    if not raw:
        return base
    kw = {}
    for item in raw.split(","):
        key, _, val = item.partition("=")
        key = key.strip()
        if not hasattr(base, key):
            raise SystemExit(f"unknown quadrature field {key!r}")
        current = getattr(base, key)
        kw[key] = type(current)(float(val)) if isinstance(current, (int, float)) \
            else val
    return replace(base, **kw)


@dataclass(frozen=True)
class Campaign:
    config: NetworkConfig
    axis: str                    # e.g. "lambda:0", "mu:1", "T", ...
    values: tuple
    queries: tuple               # TypicalQuery templates (threshold may be overridden)
    engines: tuple = ("analytic",)
    trials: int = 10000
    seed: int = 1
    correlate: str = "tier2_bss"   # target for the alpha axis

    def __post_init__(self):
        name = self.axis.split(":")[0]
        if name not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}")
        vals = [float(v) for v in self.values]
        if any(not math.isfinite(v) for v in vals):
            raise ValueError("axis values must be finite")
        if list(vals) != sorted(vals):
            raise ValueError("axis values must be sorted ascending")
        for engine in self.engines:
            if engine not in ("analytic", "sim"):
                raise ValueError(f"unknown engine {engine!r}")
        if "sim" in self.engines and self.trials < 100:
            raise ValueError("simulation campaigns need at least 100 trials")


@dataclass(frozen=True)
class ResultRow:
    config_hash: str
    query: str
    threshold: float
    axis: str
    value: float
    engine: str
    outage: float | None
    ci95: float | None
    trials: int | None
    wall_time: float
    error: str | None = None


def _apply_axis(config: NetworkConfig, query: TypicalQuery, axis: str,
                value: float):
    name, _, idx = axis.partition(":")
    if name == "lambda":
        i = int(idx or 0)
        tier1 = list(config.tier1)
        tier1[i] = replace(tier1[i], intensity=value)
        return config.with_(tier1=tuple(tier1)), query, None
    if name == "mu":
        i = int(idx or 0)
        tier2 = list(config.tier2)
        tier2[i] = replace(tier2[i], intensity=value)
        return config.with_(tier2=tuple(tier2)), query, None
    if name == "T":
        return config, dataclasses.replace(query, sir_threshold=value), None
    if name == "exclusion_radius":
        if config.exclusion.mode == "none":
            raise ValueError("exclusion_radius sweep needs a base config "
                             "with an exclusion mode")
        return (config.with_(exclusion=replace(config.exclusion, radius=value)),
                query, None)
    if name == "qp_ratio_db":
        if len(config.tier1) != 1 or len(config.tier2) != 1 or \
                len(config.tier2[0].ue_classes) != 1:
            raise ValueError("qp_ratio_db sweep needs a single-type config")
        p1 = config.tier1[0].target_power
        cls = replace(config.tier2[0].ue_classes[0],
                      target_power=p1 * 10.0 ** (value / 10.0))
        tier2 = (replace(config.tier2[0], ue_classes=(cls,)),)
        return config.with_(tier2=tier2), query, None
    if name == "alpha":
        return config, query, value        # handled by the engine dispatch
    if name == "n":
        return config.with_(access=AccessMode.orthogonal(int(value))), query, None
    raise ValueError(f"unknown sweep axis {axis!r}")


def _query_label(q: TypicalQuery) -> str:
    if q.tier == 1:
        return f"t1:{q.ue_type}"
    return f"t2:{q.bs_type},{q.ue_class}"


def _parse_query(text: str, threshold: float) -> TypicalQuery:
    kind, _, rest = text.partition(":")
    if kind == "t1":
        return TypicalQuery.tier1(int(rest or 0), threshold)
    if kind == "t2":
        l, _, k = rest.partition(",")
        return TypicalQuery.tier2(int(l or 0), int(k or 0), threshold)
    raise ValueError(f"bad query {text!r} (use t1:<k> or t2:<l>,<k>)")


def run(campaign: Campaign, spec: QuadratureSpec | None = None) -> list[ResultRow]:
    """Execute every (axis value, query, engine) cell; failures become rows."""
    spec = spec or quadrature_from_env()
    rows = []
    for value in campaign.values:
        for query in campaign.queries:
            for engine in campaign.engines:
                started = time.perf_counter()
                outage = ci = trials = None
                err = None
                try:
                    cfg, q, alpha = _apply_axis(campaign.config, query,
                                                campaign.axis, float(value))
                    bad = validate(cfg)
                    if bad:
                        raise ValueError("; ".join(str(b) for b in bad))
                    if engine == "analytic":
                        if alpha is not None:
                            raise ValueError("the alpha axis is simulation-only")
                        if q.tier == 1:
                            outage = analytic.outage_tier1(cfg, q, spec)
                        else:
                            outage = analytic.outage_tier2(cfg, q, spec)
                    else:
                        corr = None
                        if alpha is not None:
                            corr = montecarlo.CorrelationSpec(
                                campaign.correlate, float(alpha))
                        if cfg.access.mode == "orthogonal":
                            est = montecarlo.simulate_orthogonal(
                                cfg, q, campaign.trials, campaign.seed)
                        else:
                            est = montecarlo.simulate_outage(
                                cfg, q, campaign.trials, campaign.seed,
                                correlation=corr)
                        outage, ci, trials = (est.probability,
                                              est.ci95_halfwidth, est.trials)
                except Exception as exc:       # row failure must not kill the run
                    err = f"{type(exc).__name__}: {exc}"
                threshold = (float(value) if campaign.axis == "T"
                             else query.sir_threshold)
                rows.append(ResultRow(
                    config_hash=config_hash(campaign.config),
                    query=_query_label(query), threshold=threshold,
                    axis=campaign.axis, value=float(value), engine=engine,
                    outage=outage, ci95=ci, trials=trials,
                    wall_time=time.perf_counter() - started, error=err))
    return rows


def table_to_csv(rows, include_timing: bool = True) -> str:
    out = [CSV_SCHEMA + (",wall_time" if include_timing else "")]
    header = "config,query,T,axis,value,engine,outage,ci95,trials,error"
    out.append(header + (",wall_time" if include_timing else ""))
    for r in rows:
        cells = [
            r.config_hash, r.query, repr(r.threshold), r.axis, repr(r.value),
            r.engine,
            "" if r.outage is None else repr(r.outage),
            "" if r.ci95 is None else repr(r.ci95),
            "" if r.trials is None else str(r.trials),
            "" if r.error is None else r.error.replace(",", ";"),
        ]
        if include_timing:
            cells.append(f"{r.wall_time:.3f}")
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def emit_plots(rows, out_dir) -> list:
    """Write the plot-facing CSV plus one description and one gnuplot
    script per figure family (a family = one sweep axis)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    data_path = out_dir / "sweep_data.csv"
    data_path.write_text(table_to_csv(rows, include_timing=False))
    written.append(data_path)

    series = sorted({(r.query, r.engine) for r in rows if r.error is None})
    axes = sorted({r.axis for r in rows})
    for axis in axes:
        name = axis.replace(":", "_")
        desc = out_dir / f"plot_outage_vs_{name}.txt"
        lines = [
            f"figure: outage probability vs {axis}",
            "data: sweep_data.csv (columns: config,query,T,axis,value,engine,"
            "outage,ci95,trials,error)",
            f"x: value (rows with axis == {axis!r})",
            "y: outage",
        ]
        for q, engine in series:
            bars = " with 95% error bars from ci95" if engine == "sim" else ""
            lines.append(f"series: query == {q!r} and engine == {engine!r}{bars}")
        desc.write_text("\n".join(lines) + "\n")
        written.append(desc)

        gp = out_dir / f"plot_outage_vs_{name}.gp"
        plot_parts = []
        for q, engine in series:
            sel = (f"(stringcolumn('axis') eq '{axis}' && "
                   f"stringcolumn('query') eq '{q}' && "
                   f"stringcolumn('engine') eq '{engine}')")
            if engine == "sim":
                plot_parts.append(
                    f"'sweep_data.csv' using ({sel} ? column('value') : NaN):"
                    f"(column('outage')):(column('ci95')) with yerrorlines "
                    f"title '{q} {engine}'")
            else:
                plot_parts.append(
                    f"'sweep_data.csv' using ({sel} ? column('value') : NaN):"
                    f"(column('outage')) with linespoints title '{q} {engine}'")
        gp.write_text(
            "set datafile separator ','\n"
            "set key autotitle columnhead off\nset key on\n"
            f"set xlabel '{axis}'\nset ylabel 'outage probability'\n"
            "plot " + ", \\\n     ".join(plot_parts) + "\n")
        written.append(gp)
    return written


# --------------------------------------------------------------------------
# argument handling

def _add_common(p):
    p.add_argument("--config", required=True, help="TOML network config")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--query", action="append", default=None,
                   help="t1:<k> or t2:<l>,<k>; repeatable (default: all)")
    p.add_argument("-T", "--threshold", type=float, action="append",
                   default=None, help="SIR threshold (repeatable)")


def _default_queries(config: NetworkConfig):
    out = [f"t1:{k}" for k in range(len(config.tier1))]
    for l, bs in enumerate(config.tier2):
        out.extend(f"t2:{l},{k}" for k in range(len(bs.ue_classes)))
    return out


def _queries(args, config) -> list:
    names = args.query or _default_queries(config)
    thresholds = args.threshold or [0.1]
    return [_parse_query(n, t) for t in thresholds for n in names]


def _cmd_validate(args) -> int:
    config = load_config(args.config)
    problems = validate(config)
    if problems:
        for p in problems:
            print(p)
        return 1
    print(f"ok ({config_hash(config)})")
    return 0


def _cmd_analyze(args) -> int:
    config = load_config(args.config)
    spec = quadrature_from_env()
    code = 0
    print("query,T,outage")
    for q in _queries(args, config):
        try:
            fn = analytic.outage_tier1 if q.tier == 1 else analytic.outage_tier2
            print(f"{_query_label(q)},{q.sir_threshold!r},{fn(config, q, spec)!r}")
        except Exception as exc:
            print(f"{_query_label(q)},{q.sir_threshold!r},error: {exc}")
            code = 1
    return code


def _cmd_simulate(args) -> int:
    config = load_config(args.config)
    code = 0
    print("query,T,outage,ci95,trials")
    for q in _queries(args, config):
        try:
            if config.access.mode == "orthogonal":
                est = montecarlo.simulate_orthogonal(config, q, args.trials,
                                                     args.seed)
            else:
                est = montecarlo.simulate_outage(config, q, args.trials,
                                                 args.seed)
            print(f"{_query_label(q)},{q.sir_threshold!r},{est.probability!r},"
                  f"{est.ci95_halfwidth!r},{est.trials}")
        except Exception as exc:
            print(f"{_query_label(q)},{q.sir_threshold!r},error: {exc},,")
            code = 1
    return code


def _cmd_compare(args) -> int:
    config = load_config(args.config)
    spec = quadrature_from_env()
    code = 0
    print("query,T,analytic,simulated,ci95,agree")
    for q in _queries(args, config):
        try:
            fn = analytic.outage_tier1 if q.tier == 1 else analytic.outage_tier2
            ana = fn(config, q, spec)
            if config.access.mode == "orthogonal":
                est = montecarlo.simulate_orthogonal(config, q, args.trials,
                                                     args.seed)
            else:
                est = montecarlo.simulate_outage(config, q, args.trials,
                                                 args.seed)
            agree = est.agrees_with(ana)
            print(f"{_query_label(q)},{q.sir_threshold!r},{ana!r},"
                  f"{est.probability!r},{est.ci95_halfwidth!r},{agree}")
            if not agree:
                code = max(code, 0)   # disagreement is data, not an error
        except Exception as exc:
            print(f"{_query_label(q)},{q.sir_threshold!r},error: {exc},,,")
            code = 1
    return code


def _parse_utilities(specs) -> list:
    out = []
    for text in specs:
        kind, _, params = text.partition(":")
        vals = [float(v) for v in params.split(",") if v]
        if kind == "log":
            out.append(planner.UtilitySpec.scaled_log(*vals))
        elif kind == "affine":
            out.append(planner.UtilitySpec.affine(vals[0]))
        else:
            raise SystemExit(f"bad utility {text!r} (log:a,b or affine:c)")
    return out


def _cmd_plan(args) -> int:
    config = load_config(args.config)
    spec = quadrature_from_env()
    threshold = (args.threshold or [0.1])[0]
    targets1 = args.target1
    targets2 = None
    if args.target2:
        targets2 = [[1.0] * len(bs.ue_classes) for bs in config.tier2]
        for item in args.target2:
            addr, _, val = item.partition("=")
            l, _, k = addr.partition(",")
            targets2[int(l)][int(k)] = float(val)
    system = planner.build_tradeoff(config, threshold, targets1, targets2, spec)
    utilities = _parse_utilities(args.utility or
                                 ["log:1,10"] * len(config.tier2))
    result = planner.solve(system, utilities)
    report = planner.solution_report(result, system)
    print(report, end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "tradeoff.csv").write_text(planner.system_to_csv(system))
        mu_csv = "mu_index,mu,utility\n" + "".join(
            f"{i},{m!r},{utilities[i].value(m)!r}\n"
            for i, m in enumerate(result.mu))
        (out / "solution.csv").write_text(mu_csv)
        (out / "report.txt").write_text(report)
    return 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    queries = tuple(_queries(args, config))
    engines = ("analytic", "sim") if args.engine == "both" else (
        "sim" if args.engine == "sim" else "analytic",)
    campaign = Campaign(
        config=config, axis=args.axis,
        values=tuple(float(v) for v in args.values.split(",") if v),
        queries=queries, engines=engines, trials=args.trials, seed=args.seed,
        correlate=args.correlate,
    )
    rows = run(campaign)
    csv_text = table_to_csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "results.csv").write_text(csv_text)
        emit_plots(rows, out)
    else:
        print(csv_text, end="")
    return 1 if any(r.error for r in rows) else 0


def _cmd_gap(args) -> int:
    config = load_config(args.config)
    spec = quadrature_from_env()
    threshold = (args.threshold or [0.1])[0]
    utilities = _parse_utilities(args.utility or
                                 ["log:1,10"] * len(config.tier2))
    alphas = [float(a) for a in args.alphas.split(",") if a]
    rows = montecarlo.estimate_relative_gap(
        config, utilities, args.target1, alphas, args.trials, args.seed,
        threshold, correlation_target=args.correlate, spec=spec)
    print("alpha,eta,utility,relaxed_targets")
    for r in rows:
        relaxed = ";".join(repr(t) for t in r.relaxed_targets)
        print(f"{r.alpha!r},{r.eta!r},{r.utility!r},{relaxed}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="twotier",
        description="two-tier uplink outage analysis, simulation, planning")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in [("validate", _cmd_validate), ("analyze", _cmd_analyze),
                     ("simulate", _cmd_simulate), ("compare", _cmd_compare)]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(fn=fn)

    p = sub.add_parser("plan")
    _add_common(p)
    p.add_argument("--target1", type=float, nargs="+", required=True,
                   help="outage caps per tier-1 type")
    p.add_argument("--target2", action="append", default=None,
                   metavar="l,k=cap", help="tier-2 outage caps")
    p.add_argument("--utility", action="append", default=None,
                   help="per-type utility: log:a,b or affine:c")
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("sweep")
    _add_common(p)
    p.add_argument("--axis", required=True,
                   help="lambda:<i> | mu:<i> | T | exclusion_radius | "
                        "qp_ratio_db | alpha | n")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--engine", choices=("analytic", "sim", "both"),
                   default="analytic")
    p.add_argument("--correlate", choices=montecarlo.CorrelationSpec.TARGETS,
                   default="tier2_bss")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("gap")
    _add_common(p)
    p.add_argument("--alphas", required=True, help="comma-separated alphas")
    p.add_argument("--target1", type=float, nargs="+", required=True)
    p.add_argument("--utility", action="append", default=None)
    p.add_argument("--correlate", choices=montecarlo.CorrelationSpec.TARGETS,
                   default="tier2_bss")
    p.set_defaults(fn=_cmd_gap)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
