"""Query budgets and regret traces.

The algorithms see a :class:`BudgetedOracle`: a callable returning noisy,
range-normalised observations that refuses to answer once the horizon is
spent. :class:`RecordingOracle` additionally knows the true objective and the
optimum, and logs one :class:`TraceRow` per query with regret in the
objective's original units.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gp import NumericalError

__all__ = [
    "BudgetExhausted",
    "BudgetedOracle",
    "RecordingOracle",
    "RegretTrace",
    "TraceRow",
]


class BudgetExhausted(RuntimeError):
    """The global query budget ran out."""


class BudgetedOracle:
    """Wrap ``fn`` so that at most ``budget`` evaluations are served."""

    def __init__(self, fn: Callable[[np.ndarray], float], budget: int):
        self.fn = fn
        self.budget = int(budget)
        self.used = 0
        self.epoch = 0
        self.node_path = ""

    @property
    def remaining(self) -> int:
        return self.budget - self.used

    def __call__(self, x) -> float:
        if self.used >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} queries spent")
        self.used += 1
        return float(self.fn(np.asarray(x, dtype=float)))


@dataclass
class TraceRow:
    t: int
    x: tuple[float, ...]
    y: float
    inst_regret: float
    cum_regret: float
    wall_clock_ns: int
    epoch: int
    node_path: str


@dataclass
class RegretTrace:
    """Ordered record of every query of one run, plus per-epoch bookkeeping."""

    dim: int
    rows: list[TraceRow] = field(default_factory=list)
    epochs: list[dict] = field(default_factory=list)
    status: str = "complete"
    info: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    @property
    def inst_regret(self) -> np.ndarray:
        return self.column("inst_regret")

    @property
    def cum_regret(self) -> np.ndarray:
        return self.column("cum_regret")

    @property
    def points(self) -> np.ndarray:
        return np.array([r.x for r in self.rows]).reshape(-1, self.dim)

    @property
    def total_wall_clock_ns(self) -> int:
        return self.rows[-1].wall_clock_ns if self.rows else 0


class RecordingOracle(BudgetedOracle):
    """Noisy oracle over ``[0, 1]^d`` that logs regret.

    Parameters
    ----------
    f : callable
        True objective on the unit cube, in original units.
    f_star : float
        Optimal value of ``f`` (never shown to the algorithm).
    budget : int
        Horizon ``T``.
    noise_sd : float
        Standard deviation of the additive Gaussian noise.
    rng : numpy.random.Generator
    value_range : (float, float)
        Known range ``[a, b]`` of the optimum; observations are returned as
        ``(y - a) / (b - a)``.
    timing : bool
        Record wall-clock nanoseconds; when off the column is all zeros so
        repeated runs produce identical traces.
    """

    def __init__(
        self,
        f: Callable[[np.ndarray], float],
        f_star: float,
        budget: int,
        noise_sd: float,
        rng: np.random.Generator,
        value_range: tuple[float, float] = (0.0, 1.0),
        dim: int = 1,
        timing: bool = True,
        noise: Callable[[np.random.Generator], float] | None = None,
    ):
        super().__init__(f, budget)
        self.f_star = float(f_star)
        self.noise_sd = float(noise_sd)
        self.rng = rng
        self.a, self.b = map(float, value_range)
        self.timing = timing
        self.noise = noise
        self.trace = RegretTrace(dim)
        self._cum = 0.0
        self._t0 = time.perf_counter_ns()

    def start_clock(self):
        self._t0 = time.perf_counter_ns()

    def normalise(self, value: float) -> float:
        return (value - self.a) / (self.b - self.a)

    def denormalise(self, value: float) -> float:
        return self.a + (self.b - self.a) * value

    def draw_noise(self) -> float:
        if self.noise is not None:
            return float(self.noise(self.rng))
        return float(self.rng.normal(0.0, self.noise_sd)) if self.noise_sd > 0 else 0.0

    def __call__(self, x) -> float:
        if self.used >= self.budget:
            raise BudgetExhausted(f"budget of {self.budget} queries spent")
        x = np.asarray(x, dtype=float)
        fx = float(self.fn(x))
        if not math.isfinite(fx):
            raise NumericalError(f"objective returned {fx!r} at {x.tolist()}")
        y = fx + self.draw_noise()
        self.used += 1
        regret = self.f_star - fx
        self._cum += regret
        clock = time.perf_counter_ns() - self._t0 if self.timing else 0
        self.trace.rows.append(
            TraceRow(
                t=self.used,
                x=tuple(float(v) for v in x.reshape(-1)),
                y=y,
                inst_regret=regret,
                cum_regret=self._cum,
                wall_clock_ns=int(clock),
                epoch=self.epoch,
                node_path=self.node_path,
            )
        )
        return self.normalise(y)
