"""Acceptance checks, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (visible even under
captured output) and then asserts. Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import math
import sys
import time

import numpy as np
import pytest

from conftest import NoisyOracle, batch_posterior, rkhs_function
from gpthreds.bench.cli import run_single
from gpthreds.bench.config import build_objective, build_run_config, resolve_config
from gpthreds.geometry import discretize, root_cell, subtree_leaves
from gpthreds.gp import AlgoParams, GPModel, GPState
from gpthreds.kernel import Family, KernelSpec
from gpthreds.rwt import StubTester, node_count_bound, rwt_iteration
from gpthreds.seqtest import TestConfig, Verdict, local_test
from gpthreds.threds import final_cells

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number} {title}: {detail}")
        assert ok, detail

    return emit


def _runs(objective: str, algo: str, seeds, T: int, **overrides):
    conf = resolve_config(objective, {"run.T": T, **overrides})
    obj = build_objective(objective, conf)
    return obj, [run_single(algo, obj, build_run_config(conf, obj, s), T, conf["baseline.grid_max"]) for s in seeds]


def test_gp_oracle_equivalence(report):
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = 0.0
    for run in range(100):
        dim = 1 + run % 3
        kernel = KernelSpec(Family.SQUARED_EXPONENTIAL if run % 2 else Family.MATERN, 0.1 + 0.4 * rng.random(), dim, (0.5, 1.5, 2.5)[run % 3])
        lam = 10.0 ** rng.uniform(-3, 0)
        X, y, Q = rng.random((10, dim)), rng.normal(size=10), rng.random((20, dim))
        state = GPState(kernel, lam)
        for x, v in zip(X, y):
            state.update(x, v)
        mu, var = state.mean_var(Q)
        mu_ref, var_ref = batch_posterior(kernel, lam, X, y, Q)
        worst = max(worst, np.abs(mu - mu_ref).max(), np.abs(var - np.maximum(var_ref, 0.0)).max())
    elapsed = time.perf_counter() - start
    report(1, "GP oracle equivalence", worst <= 1e-8 and elapsed < 10, f"max deviation {worst:.2e}, {elapsed:.1f}s")


def _sd_sum_sequence(kernel, lam, grid, picks):
    """Running sum of the posterior sd at each point just before it is observed."""
    state = GPState(kernel, lam, candidates=grid, capacity=len(picks))
    sums, total = [], 0.0
    for idx in picks:
        _, sd = state.candidate_mean_sd()
        total += float(sd[idx])
        sums.append(total)
        state.update(grid[idx], 0.0, index=idx)
    return np.array(sums)


def test_sd_sum_bound(report):
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    worst_slack, checked = math.inf, 0
    for run in range(100):
        dim = 1 + run % 2
        kernel = KernelSpec(Family.SQUARED_EXPONENTIAL if run % 2 else Family.MATERN, 0.05 + 0.3 * rng.random(), dim)
        lam = (0.01, 0.1, 1.0)[run % 3]
        n = int(rng.integers(1, 65))
        grid = rng.random((n, dim))
        t = int(rng.integers(1, 201))
        rule = run % 3
        if rule == 0:
            picks = rng.integers(n, size=t)
        elif rule == 1:
            picks = np.arange(t) % n
        else:
            # greedy on the largest sd, the most expensive selection rule
            state = GPState(kernel, lam, candidates=grid, capacity=t)
            picks = []
            for _ in range(t):
                idx = int(np.argmax(state.candidate_mean_sd()[1]))
                picks.append(idx)
                state.update(grid[idx], 0.0, index=idx)
        sums = _sd_sum_sequence(kernel, lam, grid, picks)
        steps = np.arange(1, len(sums) + 1)
        bound = (1 + 2 * lam) * np.sqrt(n * steps)
        worst_slack = min(worst_slack, float((bound - sums).min()))
        checked += len(sums)
    elapsed = time.perf_counter() - start
    ok = worst_slack >= -1e-9 and elapsed < 60
    report(2, "posterior sd sum bound", ok, f"{checked} prefixes, smallest slack {worst_slack:.3e}, {elapsed:.1f}s")


def _slope(y):
    k = np.arange(1, len(y) + 1, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(((k - k.mean()) * (y - y.mean())).sum() / ((k - k.mean()) ** 2).sum())


def test_grid_size_bounded(report):
    start = time.perf_counter()
    _, traces = _runs("branin", "gp-threds", range(10), 3000, **{"search.strategy": "heuristic", "run.max_epochs": 20, "output.timing": False})
    full = [tr for tr in traces if len(tr.epochs) == 20]
    ok, details = bool(full), []
    for tr in full:
        sizes = [e["max_grid_size"] for e in tr.epochs]
        ok &= max(sizes) <= 2 * sizes[0] and _slope(sizes) <= 0.0
        details.append(f"max {max(sizes)} first {sizes[0]} slope {_slope(sizes):.3g}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(3, "grid size bounded over epochs", ok, f"{len(full)}/10 runs reached 20 epochs; " + "; ".join(details[:3]) + f"; {elapsed:.1f}s")


def test_interval_bound_every_epoch(report):
    start = time.perf_counter()
    violations, epochs = 0, 0
    params = AlgoParams()
    for strategy in ("heuristic", "rwt"):
        _, traces = _runs("branin", "gp-threds", range(50), 1000, **{"search.strategy": strategy, "output.timing": False})
        for tr in traces:
            for e in tr.epochs:
                rho = e["rho"]
                limit = (1 + 2 * params.c * rho / 2) * 2.0 ** (-params.alpha * rho / 2)
                violations += abs(e["b"] - e["a"]) > limit + 1e-12 or not e["interval_ok"]
                epochs += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 600
    report(4, "interval bound at every epoch", ok, f"{violations} violations over {epochs} epochs in 100 runs, {elapsed:.1f}s")


def test_walk_length_tail(report):
    start = time.perf_counter()
    p, rows, ok = 0.4, [], True
    rng = np.random.default_rng(5)
    for d in (2, 5):
        root = root_cell(d)
        leaves = subtree_leaves(root, d)
        for delta1 in (0.1, 0.01):
            bound = node_count_bound(p, d, delta1)
            over = 0
            for _ in range(10_000):
                target = leaves[int(rng.integers(len(leaves)))]
                # child and leaf tests err with probability p; the root test is exact
                stub = StubTester([target], rng, p=p, internal_error=p, leaf_miss=p, leaf_false_alarm=p)
                over += rwt_iteration(root, d, stub).nodes_visited > bound
            frac = over / 10_000
            ok &= frac <= delta1 + 0.01
            rows.append(f"d={d} delta1={delta1}: {frac:.4f} over {bound:.0f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 120
    report(5, "random-walk length tail", ok, "; ".join(rows) + f"; {elapsed:.1f}s")


def test_local_test_error_rates(report):
    start = time.perf_counter()
    kernel = KernelSpec(dim=1)
    model = GPModel(kernel, AlgoParams(B=0.5, R=0.1, lam=0.01, L=2.0))
    grid = discretize(root_cell(1), 0.1)
    gap = model.params.L * grid.delta**model.params.alpha
    p = model.params.p
    pos = neg = 0
    for s in range(200):
        rng = np.random.default_rng(s)
        f = rkhs_function(kernel, 0.5, 8, rng)
        fmax = float(f(grid.points).max())
        # the grid maximum sits exactly at the threshold
        out = local_test(grid, TestConfig(fmax, gap, p, model.params.eta_sample), NoisyOracle(f, 0.1, rng), 10**6, model)
        pos += out.verdict is Verdict.POSITIVE
        out = local_test(grid, TestConfig(fmax + 2 * gap, gap, p, model.params.eta_sample), NoisyOracle(f, 0.1, rng), 10**6, model)
        neg += out.verdict is Verdict.NEGATIVE
    elapsed = time.perf_counter() - start
    need = 1 - p - 0.05
    ok = pos / 200 >= need and neg / 200 >= need and elapsed < 300
    report(6, "local test error rates", ok, f"positive {pos}/200, negative {neg}/200 (need {need:.2f}), {elapsed:.1f}s")


@pytest.mark.slow
def test_regret_shrinks(report):
    start = time.perf_counter()
    _, traces = _runs("branin", "gp-threds", range(10), 1000, **{"search.strategy": "heuristic", "output.timing": False})
    first = np.mean([tr.inst_regret[:100].mean() for tr in traces])
    last = np.mean([tr.inst_regret[-100:].mean() for tr in traces])
    sub = sum(tr.cum_regret[999] / 1000 < tr.cum_regret[249] / 250 for tr in traces)
    stalled = sum(len(tr.epochs) == 1 for tr in traces)
    elapsed = time.perf_counter() - start
    ratio = last / first
    ok = ratio <= 0.2 and sub >= 9 and elapsed < 900
    detail = f"late/early regret {ratio:.3f} (need <= 0.2), sublinear in {sub}/10 seeds, {stalled} runs never left epoch 1, {elapsed:.1f}s"
    report(7, "regret convergence", ok, detail)


@pytest.mark.slow
def test_speed_against_baseline(report):
    seeds = range(5)
    _, ours = _runs("branin", "gp-threds", seeds, 1000, **{"search.strategy": "heuristic"})
    _, base = _runs("branin", "igp-ucb", seeds, 1000)
    t_ours = float(np.median([tr.total_wall_clock_ns for tr in ours]))
    t_base = float(np.median([tr.total_wall_clock_ns for tr in base]))
    ok = t_ours * 5 <= t_base and all(len(tr) == 1000 for tr in ours + base)
    report(8, "speed against grid UCB", ok, f"median {t_ours / 1e9:.2f}s vs {t_base / 1e9:.2f}s, speedup {t_base / t_ours:.1f}x")


def test_target_recovery(report):
    start = time.perf_counter()
    obj, traces = _runs("piecewise", "gp-threds", range(10), 500, **{"noise.sd": 0.01, "output.timing": False})
    peak = np.array([obj.known_argmax[0]])
    hits, widths = 0, []
    for tr in traces:
        cells = final_cells(tr, 1)
        hits += any(bool(c.contains(peak)[0]) for c in cells)
        widths.append(max(float(c.edges[0]) for c in cells))
    elapsed = time.perf_counter() - start
    ok = hits >= 9 and elapsed < 120
    report(9, "target recovery", ok, f"argmax kept in {hits}/10 runs, widest final cell {max(widths):.4g}, {elapsed:.1f}s")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
