"""Command-line benchmark runner.

Example::

    threds-bench --algo gp-threds --objective branin --T 1000 --seeds 10 --out-dir runs/
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..gp import NumericalError
from ..threds import RunConfig, run
from ..trace import RecordingOracle, RegretTrace
from .baseline import igp_ucb_run
from .config import ConfigError, build_objective, build_run_config, config_hash, load_config_file, resolve_config
from .objectives import OBJECTIVES, Objective

__all__ = ["main", "run_experiment", "run_single", "write_trace_csv"]

ALGOS = ("gp-threds", "igp-ucb")
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="threds-bench", description="Run GP-ThreDS or IGP-UCB on a benchmark objective.")
    ap.add_argument("--algo", choices=ALGOS, default="gp-threds")
    ap.add_argument("--objective", choices=sorted(OBJECTIVES), default="branin")
    ap.add_argument("--T", type=int, default=None, help="query budget (default from config, 1000)")
    ap.add_argument("--seeds", type=int, default=1, help="run seeds 0..N-1")
    ap.add_argument("--out-dir", default=os.environ.get("THREDS_OUT", "runs"))
    ap.add_argument("--config", help="file of key=value lines overriding defaults")
    ap.add_argument("--strategy", choices=("rwt", "heuristic"), default=None)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one config key")
    ap.add_argument("--no-timing", action="store_true", help="write zeros in the wall_clock_ns column")
    return ap


def write_trace_csv(trace: RegretTrace, path) -> None:
    """Write one row per query; floats use the shortest round-trip form."""
    header = ["t", *[f"x_{i + 1}" for i in range(trace.dim)], "y", "inst_regret", "cum_regret", "wall_clock_ns", "epoch", "node_path"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in trace.rows:
            w.writerow([r.t, *map(repr, r.x), repr(r.y), repr(r.inst_regret), repr(r.cum_regret), r.wall_clock_ns, r.epoch, r.node_path])


def run_single(algo: str, objective: Objective, cfg: RunConfig, budget: int, grid_max: int = 6400) -> RegretTrace:
    """One seeded run; returns the recorded trace."""
    rng = np.random.default_rng(cfg.seed)
    oracle = RecordingOracle(
        objective,
        objective.known_max,
        budget,
        cfg.noise_sd,
        rng,
        value_range=(cfg.params.a, cfg.params.b),
        dim=objective.dim,
        timing=cfg.timing,
    )
    try:
        if algo == "igp-ucb":
            return igp_ucb_run(cfg, oracle, grid_max=grid_max)
        return run(cfg, oracle)
    except NumericalError as err:
        oracle.trace.status = "partial"
        oracle.trace.info["error"] = f"NumericalError: {err}"
        return oracle.trace


def _overrides(args) -> dict:
    out = load_config_file(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value
    if args.T is not None:
        out["run.T"] = args.T
    if args.strategy is not None:
        out["search.strategy"] = args.strategy
    if args.no_timing:
        out["output.timing"] = False
    return out


def run_experiment(args) -> int:
    """Run every seed, write CSVs and metadata, print a summary; returns the exit code."""
    if args.seeds < 1:
        raise ConfigError("--seeds must be at least 1")
    conf = resolve_config(args.objective, _overrides(args))
    budget = conf["run.T"]
    if budget < 0:
        raise ConfigError("T must be nonnegative")
    algo_conf = dict(conf, **{"run.T": max(budget, 1)})
    objective = build_objective(args.objective, conf)
    cfgs = [build_run_config(algo_conf, objective, seed) for seed in range(args.seeds)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.algo}_{args.objective}"
    runs, code = [], EXIT_OK
    for cfg in cfgs:
        trace = run_single(args.algo, objective, cfg, budget, conf["baseline.grid_max"])
        csv_path = out_dir / f"{stem}_seed{cfg.seed}.csv"
        write_trace_csv(trace, csv_path)
        final = float(trace.cum_regret[-1]) if len(trace) else 0.0
        runs.append(
            {
                "seed": cfg.seed,
                "csv": csv_path.name,
                "status": trace.status,
                "queries": len(trace),
                "final_cum_regret": final,
                "wall_clock_ns": trace.total_wall_clock_ns,
                "epochs": len(trace.epochs),
                "info": trace.info,
            }
        )
        print(f"{stem} seed={cfg.seed} status={trace.status} queries={len(trace)} "
              f"cum_regret={final:.6g} wall_clock={trace.total_wall_clock_ns / 1e9:.3f}s")
        if trace.status == "partial":
            code = EXIT_NUMERIC
    meta = {
        "algo": args.algo,
        "objective": args.objective,
        "objective_transform": objective.transform,
        "known_max": objective.known_max,
        "config": conf,
        "config_hash": config_hash(conf),
        "seeds": [c.seed for c in cfgs],
        "runs": runs,
        "created_unix": int(time.time()),
    }
    (out_dir / f"{stem}_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run_experiment(args)
    except ConfigError as err:
        parser.print_usage(sys.stderr)
        print(f"threds-bench: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
