"""Command-line experiment runner.

    python -m superhedge <subcommand> --config FILE [--output-dir DIR]

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import scipy

from . import __version__, svgplot
from .baseline import delta_hedge_simulate, delta_hedge_values
from .claims import ClaimSpec, payoff
from .config import ExperimentConfig, config_hash, load_config, write_config
from .consumption import price_process, train_consumption, write_trajectories
from .errors import ConfigError
from .hedger0 import EvalReport, save_policy, sweep_lambda, train_t0
from .market import simulate, simulate_black_scholes
from .oracle import quantile_curve, superhedge_price_tree

log = logging.getLogger("superhedge")

SUBCOMMANDS = ("simulate", "price-oracle", "quantile-curve", "train-t0", "sweep-lambda",
               "train-consumption", "baseline-delta", "report")
TABLE_HEADER = ("lambda", "alpha", "price", "seed", "n_test")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _g6(x) -> str:
    return f"{x:.6g}"


def write_table(reports: list[EvalReport], path) -> None:
    """Lambda-sweep table: header ``lambda,alpha,price,seed,n_test``, 6 significant digits."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TABLE_HEADER)
            for r in reports:
                w.writerow([_g6(r.lam), _g6(r.alpha_hat), _g6(r.price), r.seed, r.n_test])
    except OSError as exc:
        raise RuntimeError(f"cannot write table {path}: {exc}") from exc


def read_table(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in TABLE_HEADER}


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_manifest(out: Path, cfg: ExperimentConfig, command: str, seeds: dict) -> None:
    manifest = {
        "command": command,
        "config_sha256": config_hash(cfg),
        "seeds": seeds,
        "versions": {"superhedge": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    (out / "config.cfg").write_text(write_config(cfg))


def _cmd_simulate(cfg, out, args):
    batch = simulate(cfg.market, cfg.n_paths, cfg.seed)
    x = batch.prices[:, :, 0]
    _write_rows(out / "paths.csv", ["path_id", "t", "X"],
                ([j, t, repr(float(x[j, t]))] for j in range(x.shape[0]) for t in range(x.shape[1])))
    print(f"simulated {batch.n_paths} paths over {batch.horizon} steps")
    return {"paths": cfg.seed}


def _cmd_price_oracle(cfg, out, args):
    sol = superhedge_price_tree(cfg.market, cfg.claim)
    _write_rows(out / "oracle.csv", ["quantity", "value"], [["superhedge_price", repr(sol.price)]])
    print(f"superhedge_price={sol.price:.6f}")
    return {}


def _cmd_quantile_curve(cfg, out, args):
    curve = quantile_curve(cfg.market, cfg.claim, cfg.alphas)
    _write_rows(out / "quantile_curve.csv", ["alpha", "price"],
                ([_g6(a), _g6(p)] for a, p in zip(curve.alphas, curve.prices)))
    for a, p in zip(curve.alphas, curve.prices):
        print(f"alpha={a:.6g} price={p:.6g}")
    return {}


def _write_losses(path, series: dict):
    _write_rows(path, ["series", "value"], ([name, repr(float(v))] for name, vals in series.items() for v in vals))


def _cmd_train_t0(cfg, out, args):
    policy, report = train_t0(cfg.market, cfg.claim, None, cfg.train, lam=cfg.lam)
    save_policy(out / "policy.bin", policy)
    write_table([report], out / "table.csv")
    series = {f"lambda={_g6(cfg.lam)}": report.loss_samples}
    _write_losses(out / "losses.csv", series)
    svgplot.plot("loss-histogram", series, out / "loss_histogram.svg")
    print(f"price={report.price:.6g} alpha_hat={report.alpha_hat:.6g}")
    return {"train": cfg.train.seed}


def _cmd_sweep_lambda(cfg, out, args):
    reports = sweep_lambda(cfg.market, cfg.claim, cfg.lambdas, cfg.train)
    write_table(reports, out / "table.csv")
    series = {f"lambda={_g6(r.lam)}": r.loss_samples for r in reports}
    _write_losses(out / "losses.csv", series)
    svgplot.plot("lambda-curves", read_table(out / "table.csv"), out / "lambda_curves.svg")
    svgplot.plot("loss-histogram", series, out / "loss_histogram.svg")
    for r in reports:
        print(f"lambda={r.lam:.6g} alpha_hat={r.alpha_hat:.6g} price={r.price:.6g}")
    return {"train": cfg.train.seed, "per_lambda": [r.seed for r in reports]}


def _cmd_train_consumption(cfg, out, args):
    base, report = train_t0(cfg.market, cfg.claim, None, cfg.train, lam=cfg.base_lambda)
    nets = train_consumption(cfg.market, cfg.claim, base, cfg.beta, cfg.train)
    batch = simulate(cfg.market, cfg.n_paths, cfg.seed)
    sample = price_process(base, nets, batch)
    save_policy(out / "policy.bin", base)
    write_trajectories(out / "trajectories.csv", sample)
    svgplot.plot("price-process", sample.U, out / "price_process.svg")
    _write_rows(out / "summary.csv", ["quantity", "value"], [
        ["price", _g6(report.price)], ["alpha_hat_t0", _g6(report.alpha_hat)], ["feasibility", _g6(nets.feasibility)]])
    print(f"price={report.price:.6g} alpha_hat={report.alpha_hat:.6g} feasibility={nets.feasibility:.6g}")
    return {"train": cfg.train.seed, "trajectories": cfg.seed}


def _cmd_baseline_delta(cfg, out, args):
    res = delta_hedge_simulate(cfg.market, cfg.claim, cfg.n_paths, cfg.seed)
    batch = simulate_black_scholes(cfg.market, min(cfg.n_paths, 1000), cfg.seed)
    values = delta_hedge_values(cfg.market, cfg.claim.strike, batch)
    svgplot.plot("price-process", values, out / "delta_process.svg", title="Delta-hedging value process", ylabel="V_t")
    _write_rows(out / "baseline.csv", ["quantity", "value"],
                [["initial_cost", repr(res.initial_cost)], ["alpha_hat", repr(res.alpha_hat)]])
    print(f"initial_cost={res.initial_cost:.6f} alpha_hat={res.alpha_hat:.6f}")
    return {"paths": cfg.seed}


def _cmd_report(cfg, out, args):
    """Re-render figures from CSV outputs found in ``--input`` (default: the output dir)."""
    src = Path(args.input) if args.input else out
    made = []
    if (src / "table.csv").is_file():
        svgplot.plot("lambda-curves", read_table(src / "table.csv"), out / "lambda_curves.svg")
        made.append("lambda_curves.svg")
    if (src / "losses.csv").is_file():
        series: dict[str, list] = {}
        with open(src / "losses.csv", newline="") as fh:
            for row in csv.DictReader(fh):
                series.setdefault(row["series"], []).append(float(row["value"]))
        svgplot.plot("loss-histogram", {k: np.array(v) for k, v in series.items()}, out / "loss_histogram.svg")
        made.append("loss_histogram.svg")
    if (src / "trajectories.csv").is_file():
        with open(src / "trajectories.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        n = 1 + max(int(r["path_id"]) for r in rows)
        T1 = 1 + max(int(r["t"]) for r in rows)
        U = np.zeros((n, T1))
        for r in rows:
            U[int(r["path_id"]), int(r["t"])] = float(r["U"])
        svgplot.plot("price-process", U, out / "price_process.svg")
        made.append("price_process.svg")
    if not made:
        raise ConfigError(f"no table.csv, losses.csv or trajectories.csv found in {src}")
    print("wrote " + ", ".join(made))
    return {}


_HANDLERS = {
    "simulate": _cmd_simulate,
    "price-oracle": _cmd_price_oracle,
    "quantile-curve": _cmd_quantile_curve,
    "train-t0": _cmd_train_t0,
    "sweep-lambda": _cmd_sweep_lambda,
    "train-consumption": _cmd_train_consumption,
    "baseline-delta": _cmd_baseline_delta,
    "report": _cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="superhedge", description="Superhedging experiments on discrete-time markets.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--output-dir", help="overrides [experiment] output_dir")
        if name == "report":
            p.add_argument("--input", help="directory holding CSV outputs")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = load_config(args.config)
        if args.output_dir:
            cfg = replace(cfg, output_dir=args.output_dir)
        out = Path(cfg.output_dir)
        out.mkdir(parents=True, exist_ok=True)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        seeds = _HANDLERS[args.command](cfg, out, args)
        write_manifest(out, cfg, args.command, seeds)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failures map to exit code 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
