"""Command-line front end.

Every command resolves a :class:`RunConfig` (defaults, then ``--config``,
then flags), computes a table, and writes it as CSV or JSON.  CSV files
start with ``# schema:`` and ``# config:`` comment rows; with ``--out`` a
``<out>.meta.json`` sidecar records the schema, config and summary.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
(including a failed ``validate`` check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import cir, cir_uca
from .config import ConfigError, RunConfig, apply_overrides, convert_value, load_config
from .errors import NumericalError, SeriesConvergenceError
from .grid import build_layout, distance_from_origin
from .metrics import (d_hex_grid, evaluate_link, interior_maxima, optimize_d_hex, sampling_time,
                      user_rate)
from .montecarlo import MC_SWEEP_COLUMNS, McConfig, mc_are_sweep, run_mc
from .pbs import PbsConfig, estimate_cir
from .validate import run_validation

logger = logging.getLogger("aremc")

SCHEMA_VERSION = 1
COMMANDS = ("cir", "ber-sweep", "are-sweep", "mc", "pbs", "validate")
# Keys that never change results; kept out of the embedded config so that
# the same run written to another path or with more threads is identical.
_NOT_RECORDED = ("out", "threads")


@dataclass
class Table:
    columns: list[str]
    rows: list[dict]
    summary: dict = field(default_factory=dict)
    ok: bool = True


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message, source="command line")


# flag -> (config key, help)
_SHORTCUTS = {
    "--d-hex": ("d_hex", "cell center distance [m]"),
    "--n-mol": ("n_mol", "molecules per release"),
    "--rings": ("n_rings", "interferer rings in the analytical model"),
    "--kmax": ("k_max", "last retained CIR series index"),
    "--theta-max": ("theta_max", "largest threshold searched"),
    "--mc-realizations": ("mc_realizations", "Monte Carlo symbol intervals"),
    "--mc-rings": ("mc_rings", "interferer rings in the Monte Carlo"),
    "--pbs-realizations": ("pbs_realizations", "PBS releases (0 skips PBS in cir)"),
    "--tolerance-scale": ("tolerance_scale", "factor applied to validate tolerances"),
    "--inject-fault": ("inject_fault", "deliberate defect for validate (erf-denominator)"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--seed", type=int, help="base seed of all random streams")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, help="worker threads for sweeps")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any configuration key; repeatable")
    common.add_argument("--mc", action="store_true",
                        help="add Monte Carlo markers to ber-sweep and are-sweep")
    for flag, (key, text) in _SHORTCUTS.items():
        common.add_argument(flag, dest=key, metavar=key.upper(), help=text)

    parser = _Parser(prog="aremc", description="Multiuser molecular communication on a "
                     "hexagonal grid: CIR, BER, ARE, Monte Carlo and particle simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "cir": "CIR curves for TX0, TX1 and TX7 (series, truncations, UCA, PBS)",
        "ber-sweep": "BER versus d_hex for every N in n_mol_list",
        "are-sweep": "ARE versus d_hex with the optimal cell distance per N",
        "mc": "Monte Carlo BER/ARE markers next to the analytical values",
        "pbs": "particle-based CIR estimate for one source cell",
        "validate": "run the oracle checks and report pass/fail as JSON",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for key in ("seed", "out", "format", "threads"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.mc:
        overrides["mc_markers"] = True
    for _, (key, _) in _SHORTCUTS.items():
        text = getattr(args, key)
        if text is not None:
            overrides[key] = convert_value(key, text)
    for item in args.set:
        key, sep, text = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}", source="command line")
        overrides[key.strip()] = convert_value(key.strip(), text)
    cfg = apply_overrides(cfg, overrides, source="command line")
    try:
        cfg.channel()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _f(x):
    """Plain float for output (NaN becomes None)."""
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


# ---- commands -------------------------------------------------------------


def cmd_cir(cfg: RunConfig, executor) -> Table:
    p = cfg.channel()
    layout = build_layout(cfg.d_hex, 2)
    sources = {"tx0": (0, 0), "tx1": layout.interferer(1).coord[:2],
               "tx7": layout.interferer(7).coord[:2]}
    r0 = {k: distance_from_origin(c, cfg.d_hex) for k, c in sources.items()}
    grid = PbsConfig(dt=cfg.dt, t_sim=cfg.t_sim, record_every=cfg.pbs_record_every)
    t = grid.times
    cols = {"t": t}
    for k in sources:
        try:
            cols[f"cir_{k}"] = cir(r0[k], t, p, cfg.k_max, atol=cfg.series_atol)
        except SeriesConvergenceError as exc:
            # an explicit small k_max is a request to see the truncation
            logger.warning("%s: %s; writing the truncated series", k, exc)
            cols[f"cir_{k}"] = cir(r0[k], t, p, cfg.k_max, rtol=None)
    for k in ("tx1", "tx7"):
        for km in (0, 1):
            cols[f"cir_{k}_k{km}"] = cir(r0[k], t, p, km, rtol=None)
    for k in sources:
        cols[f"cir_uca_{k}"] = cir_uca(r0[k], t, p)
    if cfg.pbs_realizations > 0:
        pcfg = PbsConfig(dt=cfg.dt, t_sim=cfg.t_sim, n_particles=cfg.pbs_particles,
                         n_realizations=cfg.pbs_realizations, seed=cfg.seed,
                         record_every=cfg.pbs_record_every)
        for k, src in sources.items():
            est = estimate_cir(pcfg, p, src, layout, executor)
            cols[f"pbs_{k}"] = est.mean_fraction
            cols[f"pbs_se_{k}"] = est.std_error
    t_max = sampling_time(p, cfg.k_max, cfg.t_sim, cfg.dt)
    names = list(cols)
    rows = [{n: _f(cols[n][i]) for n in names} for i in range(len(t))]
    summary = {"t_max": t_max, "peak_value": _f(cir(0.0, t_max, p, cfg.k_max)),
               "r0": r0, "a_rx": p.a_rx}
    return Table(names, rows, summary)


def _link_kwargs(cfg: RunConfig) -> dict:
    return dict(theta_max=cfg.theta_max, scale_receiver=cfg.scale_receiver,
                t_sim=cfg.t_sim, dt=cfg.dt, series_atol=cfg.series_atol, seed=cfg.seed)


def _map(executor, fn, items):
    return list(executor.map(fn, items)) if executor is not None else [fn(x) for x in items]


def _mc_point(cfg: RunConfig, d: float, n_mol: int):
    mcfg = McConfig(cfg.mc_realizations, cfg.mc_rings, cfg.theta_max, cfg.seed)
    return run_mc(mcfg, d, cfg.channel(d, n_mol), cfg.k_max, cfg.scale_receiver,
                  cfg.series_atol)


def cmd_ber_sweep(cfg: RunConfig, executor) -> Table:
    grid = [float(d) for d in d_hex_grid(cfg.d_hex_min, cfg.d_hex_max, cfg.grid_points)]
    cols = ["d_hex", "N", "theta", "p", "q", "ber", "ber_mc", "se"]
    rows = []
    for n in cfg.n_mol_list:
        def point(d, n=n):
            m = evaluate_link(d, cfg.n_rings, cfg.channel(d, n), cfg.k_max, **_link_kwargs(cfg))
            row = {"d_hex": d, "N": n, "theta": m.theta, "p": m.p, "q": m.q, "ber": m.ber,
                   "ber_mc": None, "se": None}
            if cfg.mc_markers:
                mc = _mc_point(cfg, d, n)
                row["ber_mc"] = mc.ber
                row["se"] = float(mc.std_errors[mc.best_theta])
            return row
        rows += _map(executor, point, grid)
    return Table(cols, rows)


def cmd_are_sweep(cfg: RunConfig, executor) -> Table:
    grid = [float(d) for d in d_hex_grid(cfg.d_hex_min, cfg.d_hex_max, cfg.grid_points)]
    cols = ["d_hex", "N", "theta", "ber", "user_rate", "spatial_rate", "are", "are_mc"]
    rows, summary = [], {}
    for n in cfg.n_mol_list:
        def point(d, n=n):
            m = evaluate_link(d, cfg.n_rings, cfg.channel(d, n), cfg.k_max, **_link_kwargs(cfg))
            row = {"d_hex": d, "N": n, "theta": m.theta, "ber": m.ber,
                   "user_rate": m.user_rate, "spatial_rate": m.spatial_rate, "are": m.are,
                   "are_mc": None}
            if cfg.mc_markers:
                mc = _mc_point(cfg, d, n)
                row["are_mc"] = user_rate(mc.p_hat, mc.q_hat) * m.spatial_rate
            return row
        block = _map(executor, point, grid)
        rows += block
        are = np.array([r["are"] for r in block])
        opt = optimize_d_hex(are, (cfg.d_hex_min, cfg.d_hex_max), cfg.grid_points)
        summary[str(n)] = {"d_hex_opt": opt.d_hex_opt, "are_max": opt.are_max,
                           "interior": opt.interior,
                           "interior_maxima": interior_maxima(
                               are, keys=[r["theta"] for r in block])}
    return Table(cols, rows, summary)


def cmd_mc(cfg: RunConfig, executor) -> Table:
    grid = d_hex_grid(cfg.d_hex_min, cfg.d_hex_max, cfg.mc_grid_points)
    mcfg = McConfig(cfg.mc_realizations, cfg.mc_rings, cfg.theta_max, cfg.seed)
    rows = mc_are_sweep(mcfg, grid, cfg.channel(), cfg.k_max, analytical_rings=cfg.n_rings,
                        executor=executor, scale_receiver=cfg.scale_receiver,
                        series_atol=cfg.series_atol)
    for r in rows:
        r["N"] = cfg.n_mol
    return Table(["N", *MC_SWEEP_COLUMNS], rows)


def cmd_pbs(cfg: RunConfig, executor) -> Table:
    if cfg.pbs_realizations < 1:
        raise ConfigError("pbs needs pbs_realizations >= 1")
    p = cfg.channel()
    layout = build_layout(cfg.d_hex, 1)
    src = (cfg.source_xp, cfg.source_yp)
    pcfg = PbsConfig(dt=cfg.dt, t_sim=cfg.t_sim, n_particles=cfg.pbs_particles,
                     n_realizations=cfg.pbs_realizations, seed=cfg.seed,
                     record_every=cfg.pbs_record_every)
    est = estimate_cir(pcfg, p, src, layout, executor)
    lo, hi = est.band(0.99)
    r0 = distance_from_origin(src, cfg.d_hex)
    an = cir(r0, est.times, p, cfg.k_max, atol=cfg.series_atol)
    cols = ["t", "mean_fraction", "std_error", "band99_lo", "band99_hi", "cir"]
    rows = [{"t": _f(est.times[i]), "mean_fraction": _f(est.mean_fraction[i]),
             "std_error": _f(est.std_error[i]), "band99_lo": _f(lo[i]),
             "band99_hi": _f(hi[i]), "cir": _f(an[i])} for i in range(len(est.times))]
    inside = (an >= lo) & (an <= hi)
    return Table(cols, rows, {"r0": r0, "fraction_in_band99": float(inside.mean())})


def cmd_validate(cfg: RunConfig, executor) -> Table:
    report = run_validation(cfg.tolerance_scale, cfg.inject_fault, cfg.seed)
    cols = ["name", "passed", "measured", "tolerance", "detail"]
    return Table(cols, report["checks"], {"passed": report["passed"]}, ok=report["passed"])


HANDLERS = {"cir": cmd_cir, "ber-sweep": cmd_ber_sweep, "are-sweep": cmd_are_sweep,
            "mc": cmd_mc, "pbs": cmd_pbs, "validate": cmd_validate}


# ---- output ---------------------------------------------------------------


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render(command: str, cfg: RunConfig, table: Table, fmt: str) -> str:
    schema = f"aremc.{command}/{SCHEMA_VERSION}"
    record = {k: v for k, v in cfg.to_dict().items() if k not in _NOT_RECORDED}
    if fmt == "json":
        doc = {"schema": schema, "command": command, "config": record,
               "columns": table.columns, "summary": table.summary, "rows": table.rows}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# schema: {schema} columns={','.join(table.columns)}\n")
    buf.write(f"# config: {json.dumps(record, sort_keys=True, allow_nan=False)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows([_cell(row.get(c)) for c in table.columns] for row in table.rows)
    return buf.getvalue()


def sidecar(command: str, cfg: RunConfig, table: Table) -> str:
    record = {k: v for k, v in cfg.to_dict().items() if k not in _NOT_RECORDED}
    doc = {"schema": f"aremc.{command}/{SCHEMA_VERSION}", "command": command,
           "seed": cfg.seed, "config": record, "columns": table.columns,
           "summary": table.summary}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _f(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="aremc: %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"aremc: config error: {exc}", file=sys.stderr)
        return 1
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else nullcontext()
    try:
        with pool as executor:
            table = HANDLERS[args.command](cfg, executor)
    except ConfigError as exc:
        print(f"aremc: config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"aremc: numerical failure: {exc}", file=sys.stderr)
        return 2
    table = Table(table.columns, _clean(table.rows), _clean(table.summary), table.ok)
    text = render(args.command, cfg, table, cfg.format)
    try:
        if cfg.out:
            with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            with open(cfg.out + ".meta.json", "w", encoding="utf-8") as fh:
                fh.write(sidecar(args.command, cfg, table))
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"aremc: cannot write output: {exc}", file=sys.stderr)
        return 1
    if not table.ok:
        print("aremc: validation failed", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
