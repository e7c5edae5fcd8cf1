"""Target-node search on a depth-``d`` subtree.

:func:`get_target_nodes` repeats a biased random walk (:func:`rwt_iteration`)
until a root termination test says no target is left. Each walk starts at the
subtree root, moves to the first child whose local test accepts (left before
right) or back to the parent, and ends when a high-confidence leaf test
accepts. Leaves found earlier are excluded from every later grid.

The walk only talks to a *tester* object exposing ``root_test``,
``child_test`` and ``leaf_test``. :class:`GPNodeTester` runs the GP local
tests against a budgeted oracle; :class:`StubTester` answers from a known
target set with configurable error rates, for simulation.

:func:`heuristic_get_target_nodes` is the single-grid variant that samples the
whole subtree at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .geometry import Cell, RegionExcluded, discretize, split_cell, subtree_leaves
from .gp import AlgoParams, GPModel
from .seqtest import T_TERM_CAP, Mode, TestConfig, local_test, t_term, two_sided_test
from .trace import BudgetExhausted, BudgetedOracle

__all__ = [
    "GPNodeTester",
    "IterationResult",
    "StubTester",
    "TargetSearch",
    "WalkStatus",
    "delta_hat",
    "get_target_nodes",
    "heuristic_get_target_nodes",
    "node_count_bound",
    "rwt_iteration",
]


def delta_hat(r: int, params: AlgoParams, d: int) -> float:
    """Leaf/root confidence ``delta0 log(4dT/delta0) / (8 T r (r+1) (p - 1/2)^2)``, clamped to ``(0, p]``."""
    if r < 1:
        raise ValueError("r must be >= 1")
    T, d0, p = params.T, params.delta0, params.p
    value = d0 / (8.0 * T * r * (r + 1) * (p - 0.5) ** 2) * math.log(4.0 * d * T / d0)
    return min(value, p)


def node_count_bound(p: float, d: int, delta1: float) -> float:
    """Nodes one walk stays below with probability ``1 - delta1``."""
    return math.log(d / delta1) / (2.0 * (p - 0.5) ** 2)


class WalkStatus(str, Enum):
    FOUND_LEAF = "found_leaf"
    ROOT_REJECTED = "root_rejected"
    BUDGET_EXHAUSTED = "budget_exhausted"
    STALLED = "stalled"


@dataclass
class IterationResult:
    status: WalkStatus
    leaf: Cell | None = None
    nodes_visited: int = 1
    path: list[Cell] = field(default_factory=list)


# -- testers -------------------------------------------------------------


class GPNodeTester:
    """Runs GP local tests for one subtree search at threshold ``tau``.

    ``grid_delta`` is the fill distance of every grid in the epoch and the gap
    is ``L grid_delta^alpha``. Raises :class:`BudgetExhausted` when a test is
    cut short by the oracle's budget.
    """

    def __init__(self, model: GPModel, tau: float, grid_delta: float, oracle: BudgetedOracle):
        self.model = model
        self.params = model.params
        self.p = model.params.p
        self.tau = float(tau)
        self.grid_delta = float(grid_delta)
        self.gap = self.params.L * self.grid_delta**self.params.alpha
        self.oracle = oracle
        self.grid_sizes: list[int] = []
        self.queries = 0

    def _grid(self, cell: Cell, excluded):
        try:
            grid = discretize(cell, self.grid_delta, excluded)
        except RegionExcluded:
            return None
        self.grid_sizes.append(len(grid))
        return grid

    def _finish(self, cell: Cell, outcome) -> bool:
        self.queries += outcome.queries_used
        if outcome.terminated_by_budget:
            raise BudgetExhausted(f"budget ran out while testing {cell.label()}")
        return outcome.positive

    def _prepare(self, cell: Cell):
        self.oracle.node_path = cell.label()
        return self.oracle.remaining

    def child_test(self, cell: Cell, excluded) -> bool:
        grid = self._grid(cell, excluded)
        if grid is None:
            return False
        cfg = TestConfig(self.tau, self.gap, self.p, self.params.eta_sample)
        return self._finish(cell, local_test(grid, cfg, self.oracle, self._prepare(cell), self.model))

    def _two_sided(self, cell: Cell, excluded, r: int, mode: Mode) -> bool:
        grid = self._grid(cell, excluded)
        if grid is None:
            return False
        dh = delta_hat(r, self.params, self.model.dim)
        outcome = two_sided_test(
            grid, self.tau, self.p, dh, mode, self.oracle, self._prepare(cell), self.model, gap=self.gap
        )
        return self._finish(cell, outcome)

    def leaf_test(self, cell: Cell, excluded, r: int) -> bool:
        return self._two_sided(cell, excluded, r, Mode.ACCEPT_HIGH)

    def root_test(self, cell: Cell, excluded, r: int) -> bool:
        return self._two_sided(cell, excluded, r, Mode.REJECT_HIGH)


class StubTester:
    """Answers tests from a known set of target leaves, flipping answers at random.

    A node is a true positive when it is an ancestor of (or equal to) a
    target leaf that has not been excluded. Each kind of test flips its answer
    independently: ``internal_error`` for child tests, ``leaf_miss`` /
    ``leaf_false_alarm`` for leaf tests and ``root_miss`` /
    ``root_false_alarm`` for root termination tests. Cells covered by
    excluded leaves always answer negative, as a GP test on an empty grid does.
    """

    def __init__(
        self,
        targets,
        rng: np.random.Generator | None = None,
        p: float = 0.4,
        internal_error: float = 0.0,
        leaf_miss: float = 0.0,
        leaf_false_alarm: float = 0.0,
        root_miss: float = 0.0,
        root_false_alarm: float = 0.0,
    ):
        self.targets = [t.path if isinstance(t, Cell) else str(t) for t in targets]
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.p = p
        self.internal_error = internal_error
        self.leaf_miss = leaf_miss
        self.leaf_false_alarm = leaf_false_alarm
        self.root_miss = root_miss
        self.root_false_alarm = root_false_alarm
        self.calls = 0

    def truth(self, cell: Cell, excluded) -> bool:
        excl = [e.path for e in excluded]
        return any(
            t.startswith(cell.path) and not any(t.startswith(e) for e in excl) for t in self.targets
        )

    @staticmethod
    def fully_excluded(path: str, excl: list[str]) -> bool:
        """Whether excluded cells cover ``path`` (such nodes have no grid points)."""
        if any(path.startswith(e) for e in excl):
            return True
        if not any(e.startswith(path) for e in excl):
            return False
        return StubTester.fully_excluded(path + "0", excl) and StubTester.fully_excluded(path + "1", excl)

    def _answer(self, cell: Cell, excluded, miss: float, false_alarm: float) -> bool:
        self.calls += 1
        if self.fully_excluded(cell.path, [e.path for e in excluded]):
            return False
        truth = self.truth(cell, excluded)
        flip = miss if truth else false_alarm
        if flip > 0 and self.rng.random() < flip:
            return not truth
        return truth

    def child_test(self, cell, excluded) -> bool:
        e = self.internal_error
        return self._answer(cell, excluded, e, e)

    def leaf_test(self, cell, excluded, r) -> bool:
        return self._answer(cell, excluded, self.leaf_miss, self.leaf_false_alarm)

    def root_test(self, cell, excluded, r) -> bool:
        return self._answer(cell, excluded, self.root_miss, self.root_false_alarm)


# -- the walk ------------------------------------------------------------


def rwt_iteration(
    subtree_root: Cell,
    levels: int,
    tester,
    r: int = 1,
    excluded=(),
    max_steps: int | None = None,
) -> IterationResult:
    """One walk from the subtree root to an accepted leaf.

    The root termination test runs first; a rejection ends the search. Every
    arrival at a node, the start included, counts towards ``nodes_visited``.

    A tester with a ``queries`` counter is deterministic between queries, so
    returning to a node without having queried since the last visit means the
    walk cycles forever; it then ends as ``STALLED``.
    """
    excluded = list(excluded)
    stack = [subtree_root]
    result = IterationResult(WalkStatus.ROOT_REJECTED, path=[subtree_root])
    leaf_depth = subtree_root.depth + levels
    last_seen: dict[str, int] = {}

    def arrive(cell: Cell | None) -> bool:
        if cell is None:
            stack.pop() if len(stack) > 1 else None
        else:
            stack.append(cell)
        result.path.append(stack[-1])
        result.nodes_visited += 1
        if max_steps is not None and result.nodes_visited > max_steps:
            raise RuntimeError(f"walk exceeded {max_steps} steps")
        spent = getattr(tester, "queries", None)
        if spent is None:
            return False
        key = stack[-1].path
        stuck = last_seen.get(key) == spent
        last_seen[key] = spent
        return stuck

    try:
        if not tester.root_test(subtree_root, excluded, r):
            return result
        if getattr(tester, "queries", None) is not None:
            last_seen[subtree_root.path] = tester.queries
        while True:
            node = stack[-1]
            if node.depth == leaf_depth:
                if tester.leaf_test(node, excluded, r):
                    result.status = WalkStatus.FOUND_LEAF
                    result.leaf = node
                    return result
                stuck = arrive(None)
            else:
                left, right = split_cell(node)
                if tester.child_test(left, excluded):
                    stuck = arrive(left)
                elif tester.child_test(right, excluded):
                    stuck = arrive(right)
                else:
                    stuck = arrive(None)
            if stuck:
                result.status = WalkStatus.STALLED
                return result
    except BudgetExhausted:
        result.status = WalkStatus.BUDGET_EXHAUSTED
        return result


@dataclass
class TargetSearch:
    """Outcome of a subtree search."""

    found: list[Cell] = field(default_factory=list)
    exhausted: bool = False
    stalled: bool = False
    iterations: list[IterationResult] = field(default_factory=list)
    node_bound: float = math.inf

    @property
    def root_tests(self) -> int:
        return len(self.iterations)

    @property
    def over_bound(self) -> int:
        """Walks that visited at least ``node_bound`` nodes."""
        return sum(it.nodes_visited >= self.node_bound for it in self.iterations)


def get_target_nodes(
    subtree_root: Cell,
    tester,
    delta: float,
    levels: int | None = None,
    max_iterations: int | None = None,
) -> TargetSearch:
    """Find the target leaves ``levels`` below ``subtree_root`` one walk at a time.

    ``delta`` is the confidence budget of the node-count bound; the tests
    themselves run at ``p`` and ``delta_hat(r)``.
    """
    levels = subtree_root.dim if levels is None else levels
    search = TargetSearch(node_bound=node_count_bound(tester.p, subtree_root.dim, delta))
    r = 1
    while max_iterations is None or r <= max_iterations:
        it = rwt_iteration(subtree_root, levels, tester, r, excluded=search.found)
        search.iterations.append(it)
        if it.status is WalkStatus.FOUND_LEAF:
            search.found.append(it.leaf)
            r += 1
            continue
        search.exhausted = it.status is WalkStatus.BUDGET_EXHAUSTED
        search.stalled = it.status is WalkStatus.STALLED
        break
    return search


def heuristic_get_target_nodes(
    subtree_root: Cell,
    model: GPModel,
    tau: float,
    grid_delta: float,
    oracle: BudgetedOracle,
    delta: float | None = None,
    levels: int | None = None,
    grid_sizes: list | None = None,
) -> TargetSearch:
    """Single-grid target search over the whole subtree.

    Samples the UCB maximiser of one grid covering ``subtree_root``. Whenever
    the best LCB reaches ``tau``, or ``t_term`` samples pass without a
    discovery, the leaf holding the LCB maximiser becomes a target and its
    points leave the grid. Stops once every UCB is at most ``tau - gap``.
    """
    params = model.params
    levels = subtree_root.dim if levels is None else levels
    delta = params.eta_sample if delta is None else delta
    gap = params.L * grid_delta**params.alpha
    leaves = subtree_leaves(subtree_root, levels)
    grid = discretize(subtree_root, grid_delta)
    if grid_sizes is not None:
        grid_sizes.append(len(grid))
    owner = np.full(len(grid), -1)
    for i, leaf in enumerate(leaves):
        owner[leaf.contains(grid.points)] = i
    active = np.ones(len(grid), dtype=bool)
    try:
        horizon = t_term(model, delta, gap, len(grid))
    except ValueError:
        if oracle.remaining >= T_TERM_CAP:
            raise
        horizon = math.inf
    state = model.new_state(grid.points)
    search = TargetSearch()
    oracle.node_path = subtree_root.label()
    t, t_loc = 1, 1
    while True:
        mu, sd = state.candidate_mean_sd()
        b = model.beta(t, delta)
        ucb = np.where(active, mu + b * sd, -np.inf)
        lcb = np.where(active, mu - b * sd, -np.inf)
        if ucb.max() <= tau - gap:
            break
        if lcb.max() >= tau or t_loc == horizon:
            leaf_idx = owner[int(np.argmax(lcb))]
            search.found.append(leaves[leaf_idx])
            active &= owner != leaf_idx
            t_loc = 0
            if not active.any():
                break
            ucb = np.where(active, ucb, -np.inf)
        if oracle.remaining <= 0:
            search.exhausted = True
            break
        if t == 1 and active[grid.center_index]:
            idx = grid.center_index
        else:
            idx = int(np.argmax(ucb))
        x = grid.points[idx]
        state.update(x, oracle(x), index=idx)
        t += 1
        t_loc += 1
    return search
