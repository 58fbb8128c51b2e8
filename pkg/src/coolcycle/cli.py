"""Command-line interface.

Subcommands:
  search        parse -> build -> enumerate -> ranked table / CSV / JSON
  export-graph  parse + build once, save a binary snapshot for later searches
  diagram       DOT digraph of one scheme (single or paired excited states)
  simulate      stochastic cycling survival for one scheme (sanity checks)

Option precedence for ``search``: command-line flags beat the optional
``--config`` file (``key = value`` lines, keys are the long flag names),
which beats built-in defaults. Wavelength band, laser budget and molecular
mass have no sensible defaults and must be supplied one way or the other.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import montecarlo, report, search, snapshot
from .errors import CoolcycleError
from .exomol import StatesSchema, load_dataset
from .graph import DEFAULT_SENTINEL_LIFETIME_S, LevelGraph, build_graph
from .search import CoolingScheme, SearchParams


class UsageError(Exception):
    pass


_SEARCH_DEFAULTS = {
    "t0_k": search.DEFAULT_T0_K,
    "intensity_mw_cm2": 1e3,
    "br_floor": search.DEFAULT_BR_FLOOR,
    "min_tau_s": search.DEFAULT_MIN_STARTING_LIFETIME_S,
    "sentinel_tau_s": DEFAULT_SENTINEL_LIFETIME_S,
    "double_tau_ratio": 1.5,
    "relaxed_4k": False,
    "double_s1": False,
    "g_exact": False,
    "format": "table",
    "full_precision": False,
    "laser_ghz": report.DEFAULT_LASER_TOLERANCE_GHZ,
    "workers": 1,
}


@dataclass
class RunConfig:
    """Everything one ``search`` invocation needs."""

    params: SearchParams
    states: Path | None = None
    trans: tuple[Path, ...] = ()
    schema: Path | None = None
    graph: Path | None = None
    double_s1: bool = False
    g_exact: bool = False  # run at exactly g_max driven transitions, no sweep
    format: str = "table"
    out: Path | None = None
    full_precision: bool = False
    laser_ghz: float = report.DEFAULT_LASER_TOLERANCE_GHZ


def _load_schema(path: Path | None) -> StatesSchema | None:
    return StatesSchema.from_file(path) if path else None


def _load_graph(cfg: RunConfig) -> LevelGraph:
    if cfg.graph:
        return snapshot.load_graph(cfg.graph)
    dataset = load_dataset(cfg.states, list(cfg.trans), _load_schema(cfg.schema))
    sentinel = (cfg.params.lifetime_sentinel_s if cfg.params is not None
                else DEFAULT_SENTINEL_LIFETIME_S)
    return build_graph(dataset, lifetime_sentinel_s=sentinel)


def run(cfg: RunConfig) -> int:
    """Execute the search pipeline described by ``cfg``; returns exit status."""
    t_start = time.perf_counter()
    graph = _load_graph(cfg)
    t_built = time.perf_counter()

    if cfg.g_exact:
        schemes = report.sort_schemes(
            search.enumerate_single_schemes(graph, cfg.params, cfg.params.g_max)
        )
    else:
        schemes = search.sweep(graph, cfg.params)
    n_single = len(schemes)
    if cfg.double_s1:
        schemes += search.enumerate_double_schemes(graph, cfg.params)
    t_searched = time.perf_counter()

    rows = report.rows_for(schemes, cfg.laser_ghz, cfg.full_precision)
    relaxed = cfg.params.relaxed_4k
    if cfg.format == "csv":
        text = report.render_csv(rows, relaxed)
    elif cfg.format == "json":
        text = json.dumps(report.scheme_json(schemes, cfg.params, cfg.laser_ghz),
                          indent=2) + "\n"
    else:
        text = report.render_table(rows, relaxed)

    if cfg.out:
        report.write_text_atomic(text, cfg.out)
    else:
        sys.stdout.write(text)

    print(
        f"{len(schemes)} schemes ({n_single} single, {len(schemes) - n_single} double) "
        f"from {graph.n_states} states / {graph.n_edges} channels; "
        f"build {t_built - t_start:.2f} s, search {t_searched - t_built:.2f} s",
        file=sys.stderr,
    )
    return 0


def _add_input_args(p: argparse.ArgumentParser, allow_snapshot: bool = True) -> None:
    p.add_argument("--states", type=Path, help="states file (.states[.bz2] or csv)")
    p.add_argument("--trans", type=Path, action="append", default=None,
                   help="transitions file; repeat for multiple files")
    p.add_argument("--schema", type=Path,
                   help="states column layout: header line or key=value config")
    if allow_snapshot:
        p.add_argument("--graph", type=Path,
                       help="binary graph snapshot (alternative to --states/--trans)")


def _check_inputs(args, parser) -> None:
    has_snapshot = getattr(args, "graph", None) is not None
    if has_snapshot:
        if args.states or args.trans:
            parser.error("--graph excludes --states/--trans")
        return
    if not args.states or not args.trans:
        parser.error("need --states and at least one --trans (or --graph)")


def _merged_search_options(args) -> dict:
    merged = dict(_SEARCH_DEFAULTS)
    merged.update({k: None for k in ("gmax", "lambda_min_nm", "lambda_max_nm", "mass_u")})
    if args.config:
        merged.update(_read_config(args.config))
    for key in list(merged):
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _read_config(path: Path) -> dict:
    options = {}
    casts = {
        "gmax": int, "workers": int,
        "relaxed_4k": _parse_bool, "double_s1": _parse_bool,
        "g_exact": _parse_bool, "full_precision": _parse_bool, "format": str,
    }
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}: line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_").lstrip("_")
        value = value.strip()
        if key not in _SEARCH_DEFAULTS and key not in (
            "gmax", "lambda_min_nm", "lambda_max_nm", "mass_u"
        ):
            raise UsageError(f"{path}: line {lineno}: unknown option {key!r}")
        options[key] = casts.get(key, float)(value)
    return options


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _cmd_search(args, parser) -> int:
    opts = _merged_search_options(args)
    for key, flag in (("gmax", "--gmax"), ("lambda_min_nm", "--lambda-min-nm"),
                      ("lambda_max_nm", "--lambda-max-nm"), ("mass_u", "--mass-u")):
        if opts[key] is None:
            raise UsageError(f"{flag} is required (flag or config file)")
    if not opts["lambda_min_nm"] < opts["lambda_max_nm"]:
        raise UsageError(
            f"--lambda-min-nm ({opts['lambda_min_nm']}) must be smaller than "
            f"--lambda-max-nm ({opts['lambda_max_nm']})"
        )
    _check_inputs(args, parser)
    try:
        params = SearchParams(
            g_max=int(opts["gmax"]),
            lambda_min_nm=opts["lambda_min_nm"],
            lambda_max_nm=opts["lambda_max_nm"],
            mass_u=opts["mass_u"],
            t0_k=opts["t0_k"],
            intensity_mw_cm2=opts["intensity_mw_cm2"],
            br_floor=opts["br_floor"],
            min_starting_lifetime_s=opts["min_tau_s"],
            lifetime_sentinel_s=opts["sentinel_tau_s"],
            relaxed_4k=bool(opts["relaxed_4k"]),
            double_lifetime_ratio_max=opts["double_tau_ratio"],
            workers=int(opts["workers"]),
        )
    except ValueError as exc:
        raise UsageError(str(exc))
    cfg = RunConfig(
        params=params,
        states=args.states,
        trans=tuple(args.trans or ()),
        schema=args.schema,
        graph=args.graph,
        double_s1=bool(opts["double_s1"]),
        g_exact=bool(opts["g_exact"]),
        format=str(opts["format"]),
        out=args.out,
        full_precision=bool(opts["full_precision"]),
        laser_ghz=opts["laser_ghz"],
    )
    if cfg.format not in ("table", "csv", "json"):
        raise UsageError(f"--format must be table, csv or json, got {cfg.format!r}")
    return run(cfg)


def _cmd_export_graph(args, parser) -> int:
    _check_inputs(args, parser)
    dataset = load_dataset(args.states, list(args.trans), _load_schema(args.schema))
    graph = build_graph(dataset, br_floor=args.br_floor,
                        lifetime_sentinel_s=args.sentinel_tau_s)
    snapshot.save_graph(graph, args.out)
    print(f"wrote {graph.n_states} states / {graph.n_edges} channels to {args.out}",
          file=sys.stderr)
    return 0


def _diagram_channels(graph: LevelGraph, s1: int, args) -> tuple:
    return tuple(
        graph.top_channels(s1, args.g, (args.lambda_min_nm, args.lambda_max_nm),
                           args.br_floor)
    )


def _cmd_diagram(args, parser) -> int:
    _check_inputs(args, parser)
    graph = _load_graph(RunConfig(params=None, states=args.states,
                                  trans=tuple(args.trans or ()), schema=args.schema,
                                  graph=args.graph))
    driven = _diagram_channels(graph, args.s1, args)
    if not driven:
        raise CoolcycleError(f"state {args.s1} has no channels under these filters")
    s0_ids = (args.s0,) if args.s0 is not None else ()
    if args.s1b is not None:
        scheme = CoolingScheme(kind="double", s1_id=(args.s1, args.s1b),
                               s0_ids=s0_ids, driven=driven,
                               driven_b=_diagram_channels(graph, args.s1b, args),
                               figures=None)
    else:
        scheme = CoolingScheme(kind="single", s1_id=args.s1, s0_ids=s0_ids,
                               driven=driven, figures=None)
    text = report.export_diagram(scheme)
    if args.out:
        report.write_text_atomic(text, args.out)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args, parser) -> int:
    _check_inputs(args, parser)
    graph = _load_graph(RunConfig(params=None, states=args.states,
                                  trans=tuple(args.trans or ()), schema=args.schema,
                                  graph=args.graph))
    i1 = graph.index_of(args.s1)
    span = graph.out_span(i1)
    if span.start == span.stop:
        raise CoolcycleError(f"state {args.s1} has no decay channels")
    top = graph.top_edges(i1, args.g, args.lambda_min_nm, args.lambda_max_nm,
                          args.br_floor)
    alive = graph.lifetimes[graph.edge_lower[top]] > args.min_tau_s
    driven_edges = set(int(e) for e in top[alive])
    if not driven_edges:
        raise CoolcycleError(f"state {args.s1} has no drivable channels here")
    driven = np.array([e in driven_edges for e in range(span.start, span.stop)])
    run_spec = montecarlo.CyclingRun(
        branching_ratios=np.array(graph.edge_br[span]),
        driven=driven,
        wavelengths_nm=np.array(graph.edge_lambda[span]),
        trials=args.trials,
        seed=args.seed,
        max_scatters=args.max_scatters,
    )
    survival = montecarlo.simulate_survival(run_spec)
    momentum = montecarlo.estimate_mean_photon_momentum(run_spec)
    checkpoints = sorted({n for n in (1, 10, 100, 1000, args.max_scatters)
                          if n <= args.max_scatters})
    print(f"driven channels: {len(driven_edges)} of {span.stop - span.start}")
    for n in checkpoints:
        print(f"survival after {n:>6} scatters: {survival[n]:.6f}")
    print(f"mean driven-photon momentum: {momentum:.6e} kg m/s")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coolcycle",
        description="Search molecular line lists for viable laser-cooling schemes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("search", help="run the full search pipeline")
    _add_input_args(ps)
    ps.add_argument("--config", type=Path, help="key = value option file")
    ps.add_argument("--gmax", type=int, help="maximum number of driven transitions")
    ps.add_argument("--lambda-min-nm", type=float, help="shortest usable wavelength")
    ps.add_argument("--lambda-max-nm", type=float, help="longest usable wavelength")
    ps.add_argument("--t0-k", type=float, help="maximum initial gas temperature (default: 500)")
    ps.add_argument("--mass-u", type=float, help="molecular mass in u")
    ps.add_argument("--intensity-mw-cm2", type=float,
                    help="uniform laser intensity (default: 1000)")
    ps.add_argument("--br-floor", type=float,
                    help="ignore channels below this branching ratio (default: 1e-8)")
    ps.add_argument("--min-tau-s", type=float,
                    help="minimum lifetime of starting/repumped states (default: 1e-6)")
    ps.add_argument("--sentinel-tau-s", type=float,
                    help="lifetime assigned to states without decay channels (default: 1e4)")
    ps.add_argument("--relaxed-4k", action=argparse.BooleanOptionalAction,
                    help="also admit schemes as if precooled to 4 K (default: off)")
    ps.add_argument("--double-s1", action=argparse.BooleanOptionalAction,
                    help="additionally search paired-excited-state schemes (default: off)")
    ps.add_argument("--g-exact", action=argparse.BooleanOptionalAction,
                    help="enumerate at exactly --gmax driven transitions "
                         "instead of sweeping 1..gmax (default: off)")
    ps.add_argument("--double-tau-ratio", type=float,
                    help="max lifetime ratio for paired excited states (default: 1.5)")
    ps.add_argument("--format", choices=("table", "csv", "json"),
                    help="output format (default: table)")
    ps.add_argument("--out", type=Path, help="write output here instead of stdout")
    ps.add_argument("--full-precision", action=argparse.BooleanOptionalAction,
                    help="emit raw doubles instead of display rounding (default: off)")
    ps.add_argument("--laser-ghz", type=float,
                    help="frequency tolerance for laser grouping (default: 1.0)")
    ps.add_argument("--workers", type=int, help="parallel workers (default: 1)")
    ps.set_defaults(func=_cmd_search)

    pe = sub.add_parser("export-graph", help="build the graph once and snapshot it")
    _add_input_args(pe, allow_snapshot=False)
    pe.add_argument("--br-floor", type=float, default=0.0,
                    help="prune channels below this BR at build time (default: keep all)")
    pe.add_argument("--sentinel-tau-s", type=float, default=DEFAULT_SENTINEL_LIFETIME_S,
                    help="lifetime for states without decay channels (default: 1e4)")
    pe.add_argument("--out", type=Path, required=True, help="snapshot path")
    pe.set_defaults(func=_cmd_export_graph, graph=None)

    pd = sub.add_parser("diagram", help="DOT diagram of one scheme")
    _add_input_args(pd)
    pd.add_argument("--s1", type=int, required=True, help="excited state id")
    pd.add_argument("--s1b", type=int, help="second excited state id (paired scheme)")
    pd.add_argument("--g", type=int, required=True, help="number of driven transitions")
    pd.add_argument("--s0", type=int, help="starting state id (colored red)")
    pd.add_argument("--lambda-min-nm", type=float, default=0.0)
    pd.add_argument("--lambda-max-nm", type=float, default=1e15)
    pd.add_argument("--br-floor", type=float, default=0.0)
    pd.add_argument("--out", type=Path, help="write DOT here instead of stdout")
    pd.set_defaults(func=_cmd_diagram)

    pm = sub.add_parser("simulate", help="stochastic cycling survival for one scheme")
    _add_input_args(pm)
    pm.add_argument("--s1", type=int, required=True, help="excited state id")
    pm.add_argument("--g", type=int, required=True, help="number of driven transitions")
    pm.add_argument("--lambda-min-nm", type=float, default=0.0)
    pm.add_argument("--lambda-max-nm", type=float, default=1e15)
    pm.add_argument("--br-floor", type=float, default=0.0)
    pm.add_argument("--min-tau-s", type=float,
                    default=search.DEFAULT_MIN_STARTING_LIFETIME_S)
    pm.add_argument("--trials", type=int, default=100_000)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--max-scatters", type=int, default=1000)
    pm.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, parser)
    except SystemExit as exc:  # argparse --help / flag errors
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CoolcycleError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
