"""Local sequential tests for the presence of threshold-exceeding points.

A test runs on a fixed grid with a fresh GP posterior. At step ``s`` it

1. accepts (+1) if some lower confidence bound reaches ``tau``;
2. rejects (-1) if every upper confidence bound is at most ``tau - gap``;
3. otherwise queries the grid point with the largest sampling UCB.

The test accepts once ``s`` reaches its termination time, so a test issues at
most ``t_term - 1`` queries. Two-sided variants change the confidence used by
one of the checks, and possibly the termination time, to make one kind of
error much rarer than the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Callable

import numpy as np

from .geometry import Grid
from .gp import GPModel

__all__ = [
    "Mode",
    "TestConfig",
    "TestOutcome",
    "Verdict",
    "local_test",
    "t_term",
    "two_sided_test",
]

T_TERM_CAP = 10**7

Oracle = Callable[[np.ndarray], float]


class Verdict(IntEnum):
    NEGATIVE = -1
    POSITIVE = 1


class Mode(str, Enum):
    ONE_SIDED = "one_sided"
    ACCEPT_HIGH = "accept_high"  # leaf test: a +1 is trusted at 1 - delta_hat
    REJECT_HIGH = "reject_high"  # root termination test: a -1 is trusted at 1 - delta_hat


@dataclass(frozen=True)
class TestConfig:
    """Threshold, gap and confidences of one local test.

    ``eta_check`` is the confidence of the UCB/LCB checks (``p``) and
    ``eta_sample`` that of the sampling rule (``delta0 / 4T``).
    """

    __test__ = False

    tau: float
    gap: float
    eta_check: float
    eta_sample: float
    mode: Mode = Mode.ONE_SIDED
    delta_hat: float | None = None

    def __post_init__(self):
        if not self.gap > 0:
            raise ValueError("gap must be positive")
        for name in ("eta_check", "eta_sample"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.mode is not Mode.ONE_SIDED:
            if self.delta_hat is None or not 0 < self.delta_hat <= self.eta_check:
                raise ValueError("two-sided tests need 0 < delta_hat <= p")


@dataclass
class TestOutcome:
    __test__ = False

    verdict: Verdict
    queries_used: int = 0
    terminated_by_budget: bool = False
    terminated_by_horizon: bool = False
    trace: list[tuple[np.ndarray, float]] = field(default_factory=list)

    @property
    def positive(self) -> bool:
        return self.verdict is Verdict.POSITIVE


@lru_cache(maxsize=8192)
def _t_term(model: GPModel, eta: float, gap: float, grid_size: int) -> int:
    const = 2.0 * (1.0 + 2.0 * model.params.lam) * math.sqrt(grid_size)
    # beta is nondecreasing, so a qualifying t satisfies t >= (const * beta_t / gap)^2
    # for every smaller candidate; iterating that bound skips most of the scan
    floor = 1
    for _ in range(64):
        nxt = int((const * model.beta(floor, eta) / gap) ** 2)
        if nxt <= floor:
            break
        floor = nxt
        if floor > T_TERM_CAP:
            return -1
    start, block = floor, 1024
    while start <= T_TERM_CAP:
        stop = min(start + block, T_TERM_CAP + 1)
        t = np.arange(start, stop, dtype=float)
        lhs = const * model.beta_array(t, eta) / np.sqrt(t)
        hit = np.flatnonzero(lhs <= gap)
        if hit.size:
            return int(start + hit[0]) + 1
        start, block = stop, block * 2
    return -1  # cached marker for "beyond the cap"


def t_term(model: GPModel, eta: float, gap: float, grid_size: int) -> int:
    """Termination time ``1 + min{t : 2 beta_t(eta) (1 + 2 lam) sqrt(n / t) <= gap}``.

    Raises ``ValueError`` when no ``t`` up to 10**7 satisfies the condition.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if not gap > 0:
        raise ValueError("gap must be positive")
    if grid_size < 1:
        raise ValueError("grid_size must be positive")
    value = _t_term(model, float(eta), float(gap), int(grid_size))
    if value < 0:
        raise ValueError(
            f"termination time exceeds {T_TERM_CAP}: gap {gap:g} is too small "
            f"for a grid of {grid_size} points"
        )
    return value


@dataclass(frozen=True)
class _Phase:
    lcb_eta: float
    ucb_eta: float
    horizon: float


def _horizon(model: GPModel, eta: float, gap: float, n: int, budget_cap: int) -> float:
    # a horizon past the scan cap is unreachable when the budget is below it
    try:
        return t_term(model, eta, gap, n)
    except ValueError:
        if budget_cap < T_TERM_CAP:
            return math.inf
        raise


def _phases(model: GPModel, cfg: TestConfig, n: int, budget_cap: int) -> list[_Phase]:
    p, gap = cfg.eta_check, cfg.gap
    if cfg.mode is Mode.ONE_SIDED:
        return [_Phase(p, p, _horizon(model, p, gap, n, budget_cap))]
    dh = cfg.delta_hat
    if cfg.mode is Mode.ACCEPT_HIGH:
        return [
            _Phase(dh, p, _horizon(model, p, gap, n, budget_cap)),
            _Phase(dh, dh, _horizon(model, dh, gap, n, budget_cap)),
        ]
    return [_Phase(p, dh, _horizon(model, dh, gap, n, budget_cap))]


def _run(grid: Grid, model: GPModel, cfg: TestConfig, oracle: Oracle, budget_cap: int) -> TestOutcome:
    if len(grid) == 0:
        raise ValueError("local test needs a nonempty grid")
    phases = _phases(model, cfg, len(grid), budget_cap)
    state = model.new_state(grid.points)
    out = TestOutcome(Verdict.POSITIVE)
    beta_cache: dict[tuple[int, float], float] = {}

    def width(s: int, eta: float) -> float:
        key = (s, eta)
        if key not in beta_cache:
            beta_cache[key] = model.beta(s, eta)
        return beta_cache[key]

    k = 0
    s = 1
    while True:
        phase = phases[k]
        mu, sd = state.candidate_mean_sd()
        if np.max(mu - width(s, phase.lcb_eta) * sd) >= cfg.tau:
            out.verdict = Verdict.POSITIVE
            return out
        if np.max(mu + width(s, phase.ucb_eta) * sd) <= cfg.tau - cfg.gap:
            out.verdict = Verdict.NEGATIVE
            return out
        if out.queries_used >= budget_cap:
            out.verdict = Verdict.POSITIVE
            out.terminated_by_budget = True
            return out
        if s == 1:
            idx = grid.center_index
        else:
            idx = int(np.argmax(mu + width(s, cfg.eta_sample) * sd))
        x = grid.points[idx]
        y = float(oracle(x))
        state.update(x, y, index=idx)
        out.trace.append((x, y))
        out.queries_used += 1
        s += 1
        while s >= phases[k].horizon:
            if k == len(phases) - 1:
                out.verdict = Verdict.POSITIVE
                out.terminated_by_horizon = True
                return out
            k += 1


def local_test(grid: Grid, cfg: TestConfig, oracle: Oracle, budget_cap: int, model: GPModel) -> TestOutcome:
    """One-sided local test on ``grid``.

    Parameters
    ----------
    grid : Grid
        Nonempty discretisation of the node.
    cfg : TestConfig
        Threshold, gap and confidences; ``cfg.mode`` must be one-sided.
    oracle : callable
        Noisy evaluation ``x -> f(x) + noise``.
    budget_cap : int
        Most queries the test may issue. If the cap is hit before a verdict
        the test accepts and sets ``terminated_by_budget``.
    model : GPModel
        Kernel, constants and information-gain bound.
    """
    if cfg.mode is not Mode.ONE_SIDED:
        raise ValueError("local_test is one-sided; use two_sided_test")
    return _run(grid, model, cfg, oracle, budget_cap)


def two_sided_test(
    grid: Grid,
    tau: float,
    p: float,
    delta_hat: float,
    mode: Mode,
    oracle: Oracle,
    budget_cap: int,
    model: GPModel,
    gap: float | None = None,
) -> TestOutcome:
    """Leaf (``ACCEPT_HIGH``) or root termination (``REJECT_HIGH``) test.

    ``ACCEPT_HIGH`` checks the LCB at confidence ``delta_hat``; if it reaches
    ``t_term(p)`` inconclusively it switches the UCB check to ``delta_hat``
    and continues until ``t_term(delta_hat)``. ``REJECT_HIGH`` checks the UCB
    at ``delta_hat`` throughout and stops at ``t_term(delta_hat)``. Both
    accept at their final horizon. ``gap`` defaults to ``L delta^alpha`` of
    the grid.
    """
    if mode is Mode.ONE_SIDED:
        raise ValueError("two_sided_test needs a two-sided mode")
    params = model.params
    if gap is None:
        gap = params.L * grid.delta**params.alpha
    cfg = TestConfig(tau, gap, p, params.eta_sample, mode, delta_hat)
    return _run(grid, model, cfg, oracle, budget_cap)
