"""Binary tree of axis-aligned cells over the unit cube, and cell grids.

A cell is identified by its path from the root: one character per split,
``"0"`` for the lower half and ``"1"`` for the upper half. Splits always bisect
the longest edge (lowest axis index on ties), so on the unit cube the split
axis at depth ``rho`` is ``rho mod d`` and every boundary is a dyadic rational,
exactly representable as a float.

Cells are half-open, ``[lower, upper)``, except along the cube's upper face,
which belongs to the cells touching it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .gp import AlgoParams

__all__ = [
    "Cell",
    "Grid",
    "RegionExcluded",
    "delta_k",
    "discretize",
    "root_cell",
    "split_cell",
    "subtree_leaves",
]


class RegionExcluded(ValueError):
    """Every grid point of a cell falls inside an excluded cell."""


@dataclass(frozen=True)
class Cell:
    lower: tuple[float, ...]
    upper: tuple[float, ...]
    depth: int = 0
    path: str = ""

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("lower and upper must have equal length")
        if not all(lo < up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("cell must have positive extent along every axis")
        if not all(0.0 <= lo and up <= 1.0 for lo, up in zip(self.lower, self.upper)):
            raise ValueError("cell must lie inside the unit cube")

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def edges(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lower) + np.asarray(self.upper)) / 2.0

    def contains(self, points) -> np.ndarray:
        """Boolean mask of the points lying in this (half-open) cell."""
        P = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lower)
        up = np.asarray(self.upper)
        below = (P < up) | ((up == 1.0) & (P <= 1.0))
        return np.all((P >= lo) & below, axis=1)

    def is_ancestor_of(self, other: "Cell") -> bool:
        """True when ``other`` equals this cell or lies below it in the tree."""
        return other.path.startswith(self.path)

    def label(self) -> str:
        return self.path or "root"


def root_cell(dim: int) -> Cell:
    return Cell((0.0,) * dim, (1.0,) * dim, 0, "")


def split_cell(cell: Cell) -> tuple[Cell, Cell]:
    """Bisect the longest edge; the left child is the lower half."""
    edges = cell.edges
    axis = int(np.argmax(edges))
    mid = (cell.lower[axis] + cell.upper[axis]) / 2.0
    left_upper = list(cell.upper)
    left_upper[axis] = mid
    right_lower = list(cell.lower)
    right_lower[axis] = mid
    left = Cell(cell.lower, tuple(left_upper), cell.depth + 1, cell.path + "0")
    right = Cell(tuple(right_lower), cell.upper, cell.depth + 1, cell.path + "1")
    return left, right


def subtree_leaves(root: Cell, levels: int) -> list[Cell]:
    """All ``2**levels`` descendants exactly ``levels`` below ``root``, in path order."""
    if levels < 1:
        raise ValueError("levels must be >= 1")
    cells = [root]
    for _ in range(levels):
        cells = [child for cell in cells for child in split_cell(cell)]
    return cells


def delta_k(params: AlgoParams, rho_k: int, dim: int) -> float:
    """Fill-distance target ``(c/L)^(1/alpha) 2^-(rho_k/d + 1)`` for an epoch at depth ``rho_k``."""
    if rho_k % dim:
        raise ValueError("rho_k must be a multiple of the dimension")
    return (params.c / params.L) ** (1.0 / params.alpha) * 2.0 ** (-(rho_k / dim + 1))


@dataclass(frozen=True, eq=False)
class Grid:
    """Discretisation of a cell with fill distance at most ``delta``.

    ``points`` holds the surviving lattice points; ``center_index`` is the
    position of the point closest to the cell centre.
    """

    cell: Cell
    points: np.ndarray
    delta: float
    center_index: int = 0

    def __len__(self) -> int:
        return self.points.shape[0]


def lattice_counts(cell: Cell, delta: float) -> np.ndarray:
    """Points per axis so that the spacing is at most ``2 delta / sqrt(d)``."""
    spacing = 2.0 * delta / math.sqrt(cell.dim)
    ratio = cell.edges / spacing
    # keep exact ratios from rounding up to the next integer
    return np.maximum(np.ceil(ratio * (1.0 - 1e-12)), 1).astype(int)


def discretize(cell: Cell, delta: float, excluded: Iterable[Cell] = ()) -> Grid:
    """Cell-centred lattice over ``cell`` minus the points inside ``excluded``.

    Raises
    ------
    RegionExcluded
        If no point survives the exclusion.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    counts = lattice_counts(cell, delta)
    axes = [
        lo + (np.arange(n) + 0.5) * (up - lo) / n
        for lo, up, n in zip(cell.lower, cell.upper, counts)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=1)
    keep = np.ones(points.shape[0], dtype=bool)
    for ex in excluded:
        if ex.is_ancestor_of(cell):
            raise RegionExcluded(f"cell {cell.label()} lies inside excluded {ex.label()}")
        if cell.is_ancestor_of(ex):
            keep &= ~ex.contains(points)
    points = points[keep]
    if points.shape[0] == 0:
        raise RegionExcluded(f"cell {cell.label()} is fully excluded")
    dist = np.sum((points - cell.center) ** 2, axis=1)
    return Grid(cell, points, float(delta), int(np.argmin(dist)))


def fill_distance(grid: Grid, probes) -> float:
    """Largest distance from any probe to its nearest grid point."""
    probes = np.atleast_2d(np.asarray(probes, dtype=float))
    best = np.full(probes.shape[0], np.inf)
    for chunk in np.array_split(grid.points, max(1, grid.points.shape[0] // 256 + 1)):
        d2 = ((probes[:, None, :] - chunk[None, :, :]) ** 2).sum(axis=2)
        best = np.minimum(best, d2.min(axis=1))
    return float(np.sqrt(best.max()))
