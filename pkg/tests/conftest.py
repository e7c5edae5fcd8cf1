import numpy as np
import pytest


def batch_posterior(kernel, lam, X, y, Q):
    """From-scratch posterior mean and variance via an explicit dense solve."""
    X = np.atleast_2d(X)
    Q = np.atleast_2d(Q)
    K = kernel.matrix(X) + lam * np.eye(len(X))
    kq = kernel.matrix(X, Q)
    A = np.linalg.solve(K, kq)
    mu = A.T @ np.asarray(y)
    var = 1.0 - np.einsum("ij,ij->j", kq, A)
    return mu, var


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rkhs_function(kernel, norm, n_centres, rng):
    """``x -> sum_i w_i k(x, z_i)`` with RKHS norm exactly ``norm``."""
    Z = rng.random((n_centres, kernel.dim))
    w = rng.normal(size=n_centres)
    w *= norm / np.sqrt(w @ kernel.matrix(Z) @ w)

    def f(x):
        return kernel.matrix(np.atleast_2d(x), Z) @ w

    return f


class NoisyOracle:
    def __init__(self, f, sd, rng):
        self.f, self.sd, self.rng = f, sd, rng
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return float(self.f(x)[0]) + (self.rng.normal(0.0, self.sd) if self.sd else 0.0)
