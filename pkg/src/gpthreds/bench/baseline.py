"""IGP-UCB on a fixed uniform grid."""

from __future__ import annotations

import math

import numpy as np

from ..gp import GPModel, GPState, NumericalError
from ..threds import RunConfig
from ..trace import BudgetedOracle, RegretTrace

__all__ = ["baseline_grid", "igp_ucb_run"]


def baseline_grid(dim: int, grid_max: int = 6400) -> np.ndarray:
    """Cell-centred grid with ``floor(grid_max^(1/d))`` points per axis."""
    if grid_max < 1:
        raise ValueError("grid_max must be positive")
    n = int(math.floor(grid_max ** (1.0 / dim) + 1e-9))
    axis = (np.arange(n) + 0.5) / n
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def igp_ucb_run(cfg: RunConfig, oracle: BudgetedOracle, grid_max: int = 6400, grid=None) -> RegretTrace:
    """Query ``argmax_x mu_{t-1}(x) + beta_t(delta0) sigma_{t-1}(x)`` over the grid until the budget is spent.

    One posterior is grown for the whole run. ``np.argmax`` breaks ties
    towards the lowest index.
    """
    model: GPModel = cfg.model()
    grid = baseline_grid(cfg.dim, grid_max) if grid is None else np.asarray(grid, dtype=float)
    if grid.shape[0] > grid_max:
        raise ValueError(f"grid of {grid.shape[0]} points exceeds grid_max={grid_max}")
    trace = getattr(oracle, "trace", None)
    if trace is None:
        trace = RegretTrace(cfg.dim)
    state = GPState(model.kernel, model.params.lam, candidates=grid, capacity=max(oracle.remaining, 1))
    if hasattr(oracle, "start_clock"):
        oracle.start_clock()
    oracle.epoch = 0
    oracle.node_path = ""
    t = 1
    while oracle.remaining > 0:
        try:
            mu, sd = state.candidate_mean_sd()
            idx = int(np.argmax(mu + model.beta(t, model.params.delta0) * sd))
            x = grid[idx]
            state.update(x, oracle(x), index=idx)
        except NumericalError as err:
            trace.status = "partial"
            trace.info["error"] = f"NumericalError: {err}"
            break
        t += 1
    return trace
