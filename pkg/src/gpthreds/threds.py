"""Thresholded domain shrinking: the epoch loop.

Each epoch fixes a threshold ``tau`` at the midpoint of an interval
``[a, b]`` believed to bracket the optimal value, and searches every cell of
the current domain for leaves (``d`` levels down) holding a point above
``tau``. If any are found they become the next domain, one level of
resolution deeper per axis, and the interval's lower end rises; otherwise the
interval slides down at the same depth.

All values inside the loop are normalised so that the known range of the
optimum is ``[0, 1]``; the oracle performs that mapping.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import Cell, RegionExcluded, delta_k, root_cell
from .gp import AlgoParams, GPModel, NumericalError
from .kernel import GammaBound, KernelSpec
from .rwt import GPNodeTester, get_target_nodes, heuristic_get_target_nodes
from .trace import BudgetedOracle, RegretTrace

__all__ = [
    "RunConfig",
    "ThresholdState",
    "interval_bound",
    "depth_progress",
    "final_cells",
    "normalised_params",
    "run",
    "update_interval",
]

log = logging.getLogger(__name__)

STRATEGIES = ("rwt", "heuristic")
# below this edge length a cell is a point for all practical purposes
MIN_EDGE = 2.0**-40


@dataclass(frozen=True)
class ThresholdState:
    a: float
    b: float
    rho: int = 0
    k: int = 1
    domain: tuple[Cell, ...] = ()

    @property
    def tau(self) -> float:
        return (self.a + self.b) / 2.0


def interval_bound(params: AlgoParams, rho: int, dim: int) -> float:
    """Largest interval width allowed at depth ``rho``: ``(1 + 2 c rho / d) 2^(-alpha rho / d)``."""
    return (1.0 + 2.0 * params.c * rho / dim) * 2.0 ** (-params.alpha * rho / dim)


def update_interval(found: bool, st: ThresholdState, params: AlgoParams, dim: int = 1) -> ThresholdState:
    """Interval and depth for the next epoch."""
    if not found:
        half = (st.b - st.a) / 2.0
        return replace(st, a=st.a - half, b=st.b - half, k=st.k + 1)
    a_new = st.tau - params.c * 2.0 ** (-params.alpha * (st.rho / dim + 1) + 1)
    return replace(st, a=a_new, b=st.b, rho=st.rho + dim, k=st.k + 1)


def normalised_params(params: AlgoParams) -> AlgoParams:
    """Constants expressed in units where the optimum's range is ``[0, 1]``."""
    scale = params.b - params.a
    return replace(params, B=params.B / scale, R=params.R / scale, a=0.0, b=1.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs.

    ``params`` are in the objective's original units; :func:`run` normalises
    them. ``max_epochs`` and ``max_cells`` are safety stops.
    """

    params: AlgoParams
    kernel: KernelSpec
    gamma_scale: float = 1.0
    seed: int = 0
    strategy: str = "rwt"
    objective: str = ""
    noise_sd: float = 0.1
    timing: bool = True
    max_epochs: int | None = None
    max_cells: int = 4096

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")
        if not self.gamma_scale > 0:
            raise ValueError("gamma scale must be positive")
        if self.noise_sd < 0:
            raise ValueError("noise sd must be nonnegative")

    @property
    def T(self) -> int:
        return self.params.T

    @property
    def dim(self) -> int:
        return self.kernel.dim

    def model(self) -> GPModel:
        return GPModel(self.kernel, normalised_params(self.params), GammaBound(self.kernel, self.gamma_scale))


def _search(cfg: RunConfig, model: GPModel, cell: Cell, tau: float, grid_delta: float, oracle):
    """Target leaves under ``cell``, grid sizes used and whether the budget ran out."""
    params = model.params
    if cfg.strategy == "heuristic":
        sizes: list[int] = []
        res = heuristic_get_target_nodes(cell, model, tau, grid_delta, oracle, params.eta_sample, grid_sizes=sizes)
        return res.found, sizes, res.exhausted
    tester = GPNodeTester(model, tau, grid_delta, oracle)
    res = get_target_nodes(cell, tester, params.eta_sample, levels=cfg.dim)
    return res.found, tester.grid_sizes, res.exhausted


def run(cfg: RunConfig, oracle: BudgetedOracle) -> RegretTrace:
    """Run the epoch loop until the oracle's budget is spent.

    The trace is taken from ``oracle.trace`` when the oracle records one.
    Per-epoch bookkeeping lands in ``trace.epochs``; ``trace.status`` is
    ``"complete"``, ``"stopped"`` (a safety stop fired) or ``"partial"``
    (a numerical failure aborted the run).
    """
    model = cfg.model()
    params = model.params
    d = cfg.dim
    trace = getattr(oracle, "trace", None)
    if trace is None:
        trace = RegretTrace(d)
    st = ThresholdState(0.0, 1.0, 0, 1, (root_cell(d),))
    if hasattr(oracle, "start_clock"):
        oracle.start_clock()
    while oracle.remaining > 0:
        if min(float(c.edges.min()) for c in st.domain) < MIN_EDGE:
            _spend_on_points(st.domain, oracle, trace)
            break
        if cfg.max_epochs is not None and st.k > cfg.max_epochs:
            trace.status = "stopped"
            trace.info["stop_reason"] = "max_epochs"
            break
        oracle.epoch = st.k
        grid_delta = delta_k(params, st.rho, d)
        bound = interval_bound(params, st.rho, d)
        record = {
            "k": st.k,
            "a": st.a,
            "b": st.b,
            "tau": st.tau,
            "rho": st.rho,
            "n_cells": len(st.domain),
            "interval_bound": bound,
            "interval_ok": abs(st.b - st.a) <= bound + 1e-12,
            "depth_progress_ok": st.k <= 2 * st.rho / d + 2,
            "start_query": oracle.used,
        }
        if not record["depth_progress_ok"]:
            log.info("epoch %d still at depth %d", st.k, st.rho)
        found: list[Cell] = []
        sizes: list[int] = []
        exhausted = False
        try:
            for cell in st.domain:
                leaves, used_sizes, exhausted = _search(cfg, model, cell, st.tau, grid_delta, oracle)
                found.extend(leaves)
                sizes.extend(used_sizes)
                if exhausted:
                    break
        except (NumericalError, RegionExcluded, ValueError) as err:
            trace.status = "partial"
            trace.info["error"] = f"{type(err).__name__}: {err}"
            record.update(found=len(found), max_grid_size=max(sizes, default=0), queries=oracle.used - record["start_query"])
            trace.epochs.append(record)
            break
        record.update(
            found=len(found),
            max_grid_size=max(sizes, default=0),
            queries=oracle.used - record["start_query"],
            completed=not exhausted,
        )
        trace.epochs.append(record)
        if exhausted:
            break
        if found:
            st = replace(update_interval(True, st, params, d), domain=tuple(found))
        else:
            st = update_interval(False, st, params, d)
        if len(st.domain) > cfg.max_cells or not all(map(math.isfinite, (st.a, st.b))):
            trace.status = "stopped"
            trace.info["stop_reason"] = "domain_too_large"
            break
    trace.info["final_domain"] = [c.path for c in st.domain]
    trace.info["final_state"] = {"a": st.a, "b": st.b, "rho": st.rho, "k": st.k}
    return trace


def _spend_on_points(domain, oracle, trace: RegretTrace) -> None:
    """The domain has shrunk to points; query their centres in turn until the budget is gone."""
    trace.info["stop_reason"] = "resolution"
    oracle.node_path = ""
    centres = [c.center for c in domain]
    i = 0
    try:
        while oracle.remaining > 0:
            oracle(centres[i % len(centres)])
            i += 1
    except NumericalError as err:
        trace.status = "partial"
        trace.info["error"] = f"{type(err).__name__}: {err}"


def final_cells(trace: RegretTrace, dim: int) -> list[Cell]:
    """Rebuild the last domain of a run from its stored paths."""
    from .geometry import split_cell

    out = []
    for path in trace.info.get("final_domain", []):
        cell = root_cell(dim)
        for bit in path:
            cell = split_cell(cell)[int(bit)]
        out.append(cell)
    return out


def depth_progress(trace: RegretTrace) -> np.ndarray:
    """Per-epoch flags of the soft two-epochs-per-depth property."""
    return np.array([e["depth_progress_ok"] for e in trace.epochs], dtype=bool)
