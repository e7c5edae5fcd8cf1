"""Benchmark objectives on the unit cube, written as maximisation problems.

Branin and Rosenbrock are evaluated on their conventional input boxes and
turned into maximisation problems by a fixed affine map of the value, chosen
so the optimum lands inside the range the algorithm is told about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from ..kernel import KernelSpec

__all__ = [
    "OBJECTIVES",
    "Objective",
    "branin",
    "evaluate_objective",
    "gp_sample",
    "make_objective",
    "piecewise_synthetic",
    "rosenbrock",
]

BRANIN_MIN = 5.0 / (4.0 * math.pi)  # 0.397887...
BRANIN_MINIMISERS = ((-math.pi, 12.275), (math.pi, 2.275), (3.0 * math.pi, 2.475))
BRANIN_SCALE = 51.95
ROSENBROCK_BOX = 2.048
ROSENBROCK_SCALE = 400.0
ROSENBROCK_TOP = 10.0


@dataclass(frozen=True)
class Objective:
    """A maximisation problem on ``[0, 1]^dim``.

    ``value_range`` is the interval handed to the algorithm as known to hold
    the optimal value; ``transform`` documents the value map.
    """

    name: str
    dim: int
    fn: Callable[[np.ndarray], float]
    known_max: float
    known_argmax: tuple[tuple[float, ...], ...]
    value_range: tuple[float, float]
    transform: dict = field(default_factory=dict)

    def __call__(self, x) -> float:
        return evaluate_objective(self, x)


def evaluate_objective(obj: Objective, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != obj.dim:
        raise ValueError(f"{obj.name} expects points of dimension {obj.dim}")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("point lies outside the unit cube")
    return obj.fn(x)


def _branin_raw(x1, x2):
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    t = 1.0 / (8.0 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * np.cos(x1) + 10.0


def branin() -> Objective:
    """Branin on ``[-5, 10] x [0, 15]``, mapped to ``1 - (raw - min) / 51.95``; maximum exactly 1."""

    def fn(u):
        return 1.0 - (_branin_raw(15.0 * u[..., 0] - 5.0, 15.0 * u[..., 1]) - BRANIN_MIN) / BRANIN_SCALE

    argmax = tuple(((x1 + 5.0) / 15.0, x2 / 15.0) for x1, x2 in BRANIN_MINIMISERS)
    transform = {"input": "x1 = 15 u1 - 5, x2 = 15 u2", "value": f"1 - (raw - {BRANIN_MIN!r}) / {BRANIN_SCALE}"}
    return Objective("branin", 2, fn, 1.0, argmax, (0.5, 1.2), transform)


def rosenbrock() -> Objective:
    """Rosenbrock on ``[-2.048, 2.048]^2``, mapped to ``10 - raw / 400``; maximum exactly 10."""

    def fn(u):
        x = (2.0 * u - 1.0) * ROSENBROCK_BOX
        raw = 100.0 * (x[..., 1] - x[..., 0] ** 2) ** 2 + (1.0 - x[..., 0]) ** 2
        return ROSENBROCK_TOP - raw / ROSENBROCK_SCALE

    u_star = (1.0 / ROSENBROCK_BOX + 1.0) / 2.0
    transform = {"input": "x = 2.048 (2 u - 1)", "value": f"{ROSENBROCK_TOP} - raw / {ROSENBROCK_SCALE}"}
    return Objective("rosenbrock", 2, fn, ROSENBROCK_TOP, ((u_star, u_star),), (3.0, 12.0), transform)


def piecewise_synthetic(peak: float = 0.75) -> Objective:
    """1-d tent with a sharp maximum of 1 at ``peak`` and a lower bump at 0.25."""

    def fn(u):
        x = u[..., 0]
        return np.maximum(1.0 - 4.0 * np.abs(x - peak), 0.5 - 2.0 * np.abs(x - 0.25))

    transform = {"value": f"max(1 - 4|x - {peak}|, 0.5 - 2|x - 0.25|)"}
    return Objective("piecewise", 1, fn, 1.0, ((peak,),), (0.0, 1.25), transform)


def gp_sample(
    dim: int = 1,
    rkhs_norm: float = 1.0,
    n_centres: int = 20,
    lengthscale: float = 0.2,
    seed: int = 0,
) -> Objective:
    """Random element ``sum_i w_i k(., z_i)`` of the SE RKHS with a given norm.

    The sign is chosen so the maximum is at least the absolute minimum, so
    the optimum lies in ``[0, rkhs_norm]``.
    """
    rng = np.random.default_rng(seed)
    kernel = KernelSpec(lengthscale=lengthscale, dim=dim)
    centres = rng.random((n_centres, dim))
    w = rng.normal(size=n_centres)
    w *= rkhs_norm / math.sqrt(float(w @ kernel.matrix(centres) @ w))
    probe = _probe_grid(dim)
    vals = kernel.matrix(probe, centres) @ w
    if -vals.min() > vals.max():
        w, vals = -w, -vals

    def fn(u):
        u = np.asarray(u, dtype=float)
        out = kernel.matrix(u.reshape(-1, dim), centres) @ w
        return out.reshape(u.shape[:-1]) if u.ndim > 1 else float(out[0])

    x_best, f_best = _polish(fn, probe[np.argsort(vals)[-5:]], dim)
    transform = {"rkhs_norm": rkhs_norm, "n_centres": n_centres, "lengthscale": lengthscale, "seed": seed}
    return Objective("gpsample", dim, fn, f_best, (tuple(x_best),), (0.0, rkhs_norm), transform)


def _probe_grid(dim: int) -> np.ndarray:
    n = {1: 4001, 2: 201}.get(dim, 12)
    axes = np.linspace(0.0, 1.0, n)
    mesh = np.meshgrid(*([axes] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _polish(fn, starts, dim):
    best_x, best_f = None, -np.inf
    for x0 in starts:
        res = minimize(lambda u: -fn(u), x0, bounds=[(0.0, 1.0)] * dim, method="L-BFGS-B", tol=1e-14)
        for x in (res.x, x0):
            val = float(fn(np.asarray(x)))
            if val > best_f:
                best_x, best_f = np.asarray(x, dtype=float), val
    return best_x, best_f


OBJECTIVES = {
    "branin": branin,
    "rosenbrock": rosenbrock,
    "gpsample": gp_sample,
    "piecewise": piecewise_synthetic,
}


def make_objective(name: str, **kwargs) -> Objective:
    key = name.strip().lower().replace("-", "").replace("_", "")
    if key not in OBJECTIVES:
        raise ValueError(f"unknown objective {name!r}; choose from {sorted(OBJECTIVES)}")
    return OBJECTIVES[key](**kwargs)
