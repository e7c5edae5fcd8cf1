"""Benchmark objectives, the IGP-UCB baseline and the experiment CLI."""

from .baseline import baseline_grid, igp_ucb_run
from .cli import main, run_experiment, run_single, write_trace_csv
from .config import build_objective, build_run_config, config_hash, resolve_config
from .objectives import Objective, evaluate_objective, make_objective

__all__ = [
    "Objective",
    "baseline_grid",
    "build_objective",
    "build_run_config",
    "config_hash",
    "evaluate_objective",
    "igp_ucb_run",
    "main",
    "make_objective",
    "resolve_config",
    "run_experiment",
    "run_single",
    "write_trace_csv",
]
