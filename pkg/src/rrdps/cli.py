"""Command-line front end.

Subcommands: rate, sweep, simulate, scheme, maxdist. Tabular output is CSV
preceded by ``#`` comment lines echoing the tool version and the full
parameter set. Exit codes: 0 success, 2 invalid configuration, 3 no
positive key rate (``rate --require-key``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import asdict, replace

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .interferometer import (
    MeasuredTableError,
    arm_size,
    decompose_delay,
    load_measured_tables,
    scheme_loss_table,
    scheme_report,
)
from .model import evaluate
from .optimize import NoPositiveRateError, distance_sweep, max_distance, optimize_mu

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NO_KEY = 3

SWEEP_COLUMNS = ["length_km", "mu_opt", "v_th", "eta", "Q", "e_b", "e_src", "R", "R_per_pulse", "R_ft"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _header(command: str, cfg: RunConfig, extra: dict | None = None) -> list[str]:
    lines = [f"# rrdps {__version__}", f"# command: {command}", f"# config: {cfg.dumps()}",
             f"# seed: {cfg.seed}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {_fmt(value)}")
    return lines


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_csv(path, header: list[str], columns: list[str], rows: list[list]):
    buf = io.StringIO()
    for line in header:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    with _sink(path) as fh:
        fh.write(buf.getvalue())


def _apply_il_table(cfg: RunConfig) -> RunConfig:
    if cfg.il_table is None:
        return cfg
    table = load_measured_tables(cfg.il_table)
    cfg.alpha_IL = table.mean_total_IL()
    return cfg


def _report_row(length, mu, rep) -> list:
    return [float(length), float(mu), rep.v_th_used, rep.eta, rep.Q, rep.e_b, rep.e_src,
            rep.R, rep.R_per_pulse, rep.R_ft]


def cmd_rate(cfg: RunConfig, args) -> int:
    cfg = _apply_il_table(cfg)
    protocol, link = cfg.protocol(), cfg.link()
    if cfg.mu is None:
        mu, rep = optimize_mu(protocol, link, objective=cfg.objective)
        if rep is None:
            print("error: no positive key rate and no defined error rate", file=sys.stderr)
            return EXIT_NO_KEY if args.require_key else EXIT_OK
    else:
        mu = cfg.mu
        rep = evaluate(protocol, link, mu=mu, objective=cfg.objective)
    if args.json:
        doc = {"config": cfg.to_dict(), "report": _jsonable(asdict(rep)), "mu_used": mu,
               "version": __version__}
        text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        with _sink(args.out) as fh:
            fh.write(text)
    else:
        _write_csv(args.out, _header("rate", cfg), SWEEP_COLUMNS, [_report_row(cfg.length_km, mu, rep)])
    if args.require_key and not rep.R > 0:
        print("no positive key rate", file=sys.stderr)
        return EXIT_NO_KEY
    return EXIT_OK


def _jsonable(d: dict) -> dict:
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


def cmd_sweep(cfg: RunConfig, args) -> int:
    cfg = _apply_il_table(cfg)
    points = distance_sweep(cfg.protocol(), cfg.link(), cfg.lengths, objective=cfg.objective,
                            workers=cfg.workers)
    rows = [_report_row(p.length_km, p.mu_opt, p.report) for p in points if p.report is not None]
    _write_csv(args.out, _header("sweep", cfg), SWEEP_COLUMNS, rows)
    return EXIT_OK


SIM_COLUMNS = ["length_km", "mu", "seed", "N_em", "N", "Q_hat", "Q", "Q_sigma", "Q_z", "Q_within_5sigma",
               "e_b_hat", "e_b", "e_b_sigma", "e_b_z", "e_b_within_5sigma", "mismatches", "dark_events",
               "v_th", "R_hat", "R_ft_hat", "alice_digest", "bob_digest"]


def cmd_simulate(cfg: RunConfig, args) -> int:
    from .mc import run_session

    measured = load_measured_tables(cfg.il_table) if cfg.il_table else None
    if measured is not None:
        cfg.alpha_IL = measured.mean_total_IL()
    protocol, link = cfg.protocol(), cfg.link()
    mu = cfg.mu
    if mu is None:
        mu, _ = optimize_mu(protocol, link)
        if mu <= 0:
            raise ConfigError("mu: no positive-rate operating point to simulate; set mu explicitly")
    protocol = replace(protocol, mu=mu)
    stats = run_session(protocol, link, cfg.packets, cfg.seed, workers=cfg.workers, backend=cfg.backend,
                        dark_model=cfg.dark_model, measured=measured, key_dump=args.key_dump)
    rep = evaluate(protocol, link, mu=mu)
    q_sigma = math.sqrt(rep.Q * (1 - rep.Q) / stats.N_em)
    if stats.N:
        e_sigma = math.sqrt(rep.e_b * (1 - rep.e_b) / stats.N)
        e_z = (stats.e_b_hat - rep.e_b) / e_sigma if e_sigma > 0 else float("nan")
    else:
        e_sigma = e_z = float("nan")
    q_z = (stats.Q_hat - rep.Q) / q_sigma if q_sigma > 0 else float("nan")
    row = [cfg.length_km, mu, stats.seed, stats.N_em, stats.N, stats.Q_hat, rep.Q, q_sigma, q_z,
           int(abs(q_z) <= 5), stats.e_b_hat, rep.e_b, e_sigma, e_z, int(abs(e_z) <= 5),
           stats.mismatches, stats.dark_events, stats.v_th, stats.R_hat, stats.R_ft_hat,
           stats.alice_digest, stats.bob_digest]
    extra = {"dark_model": cfg.dark_model}
    if stats.note:
        extra["note"] = stats.note
    _write_csv(args.out, _header("simulate", cfg, extra), SIM_COLUMNS, [row])
    return EXIT_OK


TABLE_COLUMNS = ["r", "x", "y", "long_IL_dB", "short_IL_dB", "total_IL_dB", "imbalance_dB"]


def cmd_scheme(cfg: RunConfig, args) -> int:
    spec = cfg.scheme_spec()
    summary = asdict(scheme_report(spec))
    if cfg.il_table:
        table = load_measured_tables(cfg.il_table)
        m = arm_size(table.L)
        totals = table.total_IL_dB
        rows = []
        for i, r in enumerate(table.r):
            x, y = decompose_delay(int(r), m)
            lo, sh = float(table.long_IL_dB[i]), float(table.short_IL_dB[i])
            rows.append([int(r), x, y, lo, sh, float(totals[i]), abs(lo - sh)])
        summary.update(source="measured", mean_IL_dB=float(totals.mean()), max_IL_dB=float(totals.max()),
                       min_IL_dB=float(totals.min()), max_imbalance_dB=max(row[-1] for row in rows))
    else:
        rows = [[e.r, e.x, e.y, e.long_IL_dB, e.short_IL_dB, e.total_IL_dB, e.imbalance_dB]
                for e in scheme_loss_table(spec)]
        summary["source"] = "model"
    extra = {f"summary.{k}": v for k, v in summary.items()}
    _write_csv(args.out, _header("scheme", cfg, extra), TABLE_COLUMNS, rows)
    return EXIT_OK


def cmd_maxdist(cfg: RunConfig, args) -> int:
    cfg = _apply_il_table(cfg)
    try:
        km = max_distance(cfg.protocol(), cfg.link(), objective=cfg.objective)
    except NoPositiveRateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_KEY
    _write_csv(args.out, _header("maxdist", cfg), ["max_distance_km"], [[km]])
    return EXIT_OK


COMMANDS = {
    "rate": cmd_rate,
    "sweep": cmd_sweep,
    "simulate": cmd_simulate,
    "scheme": cmd_scheme,
    "maxdist": cmd_maxdist,
}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="JSON configuration file")
    p.add_argument("--length", type=float, metavar="KM", help="fiber length in km")
    p.add_argument("--lengths", metavar="KM,KM,...", help="comma-separated sweep lengths")
    p.add_argument("--mu", type=float, help="mean photon number per pulse (default: optimise)")
    p.add_argument("--seed", type=int, help="Monte Carlo seed")
    p.add_argument("--packets", type=int, metavar="N", help="packets to simulate")
    p.add_argument("--workers", type=int, help="parallel workers")
    p.add_argument("--objective", choices=["asymptotic", "finite"])
    p.add_argument("--scheme", help="interferometer scheme")
    p.add_argument("--dark-model", choices=["gate", "packet"])
    p.add_argument("--backend", choices=["python", "cython"])
    p.add_argument("--il-table", metavar="PATH", help="measured per-delay loss table (CSV)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key (repeatable)")
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    p.add_argument("--json", action="store_true", help="machine-readable JSON report (rate)")
    p.add_argument("--require-key", action="store_true", help="exit 3 when the key rate is zero")
    p.add_argument("--key-dump", metavar="PREFIX", help="write sifted bits to PREFIX.alice / PREFIX.bob")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rrdps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rrdps {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        _common(sub.add_parser(name))
    return parser


def _overrides(args) -> dict:
    out = {
        "length_km": args.length, "lengths": args.lengths, "mu": args.mu, "seed": args.seed,
        "packets": args.packets, "workers": args.workers, "objective": args.objective,
        "scheme": args.scheme, "dark_model": args.dark_model, "backend": args.backend,
        "il_table": args.il_table,
    }
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set: expected KEY=VALUE, got {item!r}")
        value = value.strip()
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, MeasuredTableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
