"""Thresholded domain shrinking for Gaussian-process bandit optimisation."""

from .geometry import Cell, Grid, delta_k, discretize, root_cell, split_cell
from .gp import AlgoParams, GPModel, GPState, NumericalError, beta, posterior_mean_sd, posterior_update
from .kernel import Family, GammaBound, KernelSpec, eval_kernel, gamma_bound
from .rwt import delta_hat, get_target_nodes, heuristic_get_target_nodes, rwt_iteration
from .seqtest import Mode, TestConfig, Verdict, local_test, t_term, two_sided_test
from .threds import RunConfig, ThresholdState, run, update_interval
from .trace import BudgetExhausted, BudgetedOracle, RecordingOracle, RegretTrace

__all__ = [
    "AlgoParams",
    "BudgetExhausted",
    "BudgetedOracle",
    "Cell",
    "Family",
    "GPModel",
    "GPState",
    "GammaBound",
    "Grid",
    "KernelSpec",
    "Mode",
    "NumericalError",
    "RecordingOracle",
    "RegretTrace",
    "RunConfig",
    "TestConfig",
    "ThresholdState",
    "Verdict",
    "beta",
    "delta_hat",
    "delta_k",
    "discretize",
    "eval_kernel",
    "gamma_bound",
    "get_target_nodes",
    "heuristic_get_target_nodes",
    "local_test",
    "posterior_mean_sd",
    "posterior_update",
    "root_cell",
    "run",
    "rwt_iteration",
    "split_cell",
    "t_term",
    "two_sided_test",
    "update_interval",
]
