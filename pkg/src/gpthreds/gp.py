"""Incremental GP posterior over a candidate set, and confidence widths.

The posterior follows the kernel-ridge form used by IGP-UCB::

    mu_t(x)   = k_t(x)^T (K_t + lam I)^{-1} y_t
    var_t(x)  = k(x, x) - k_t(x)^T (K_t + lam I)^{-1} k_t(x)

``GPState`` keeps the lower Cholesky factor of ``K_t + lam I`` and grows it by
one row per observation. When the state is built with a fixed candidate set
(a local-test grid or the IGP-UCB grid) it also carries ``V = L^{-1} K(X, C)``
so the mean and variance over all candidates cost ``O(t |C|)`` per update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .kernel import GammaBound, KernelSpec, gamma_bound

__all__ = [
    "AlgoParams",
    "GPModel",
    "GPState",
    "NumericalError",
    "beta",
    "posterior_mean_sd",
    "posterior_update",
]

JITTER = 1e-10


class NumericalError(ArithmeticError):
    """Raised when the Gram factorisation breaks down."""


@dataclass(frozen=True)
class AlgoParams:
    """Algorithm constants.

    ``B`` bounds the RKHS norm, ``R`` is the sub-Gaussian noise scale, ``lam``
    the ridge/noise-variance parameter, ``L`` and ``alpha`` the Hölder
    constants, ``c`` the interval-update hyperparameter, ``delta0`` the global
    confidence, ``p`` the local-test error, ``T`` the horizon and ``[a, b]``
    the range known to contain the optimal value.
    """

    B: float = 0.5
    R: float = 0.01
    lam: float = 0.01
    L: float = 1.0
    alpha: float = 1.0
    c: float = 0.2
    delta0: float = 1e-3
    p: float = 0.4
    T: int = 1000
    a: float = 0.0
    b: float = 1.0
    beta_factor2: bool = False

    def __post_init__(self):
        if not self.B > 0:
            raise ValueError("B must be positive")
        if not self.R >= 0:
            raise ValueError("R must be nonnegative")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.L > 0:
            raise ValueError("L must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 < self.c < 0.5:
            raise ValueError("c must lie in (0, 1/2)")
        if not 0 < self.delta0 < 1:
            raise ValueError("delta0 must lie in (0, 1)")
        if not 0 < self.p < 0.5:
            raise ValueError("p must lie in (0, 1/2)")
        if int(self.T) != self.T or self.T < 1:
            raise ValueError("T must be a positive integer")
        if not self.a < self.b:
            raise ValueError("need a < b")

    @property
    def eta_sample(self) -> float:
        """Confidence used by the sampling rule, δ0 / 4T."""
        return self.delta0 / (4.0 * self.T)


def beta(params: AlgoParams, gb: GammaBound, s: int, nu: float) -> float:
    """Confidence width ``B + R sqrt(gamma_{s-1} + 1 + log(1/nu))``.

    With ``params.beta_factor2`` the term under the root is doubled.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    if not 0 < nu < 1:
        raise ValueError("nu must lie in (0, 1)")
    inner = gamma_bound(gb, s - 1) + 1.0 + math.log(1.0 / nu)
    if params.beta_factor2:
        inner *= 2.0
    return params.B + params.R * math.sqrt(inner)


def _beta_vec(params: AlgoParams, gb: GammaBound, s: np.ndarray, nu: float) -> np.ndarray:
    inner = gamma_bound(gb, s - 1) + 1.0 + math.log(1.0 / nu)
    if params.beta_factor2:
        inner = 2.0 * inner
    return params.B + params.R * np.sqrt(inner)


@dataclass(frozen=True)
class GPModel:
    """Everything a local test needs to build posteriors and widths."""

    kernel: KernelSpec
    params: AlgoParams
    gamma: GammaBound = None

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", GammaBound(self.kernel))

    @property
    def dim(self) -> int:
        return self.kernel.dim

    def beta(self, s: int, nu: float) -> float:
        return beta(self.params, self.gamma, s, nu)

    def beta_array(self, s: np.ndarray, nu: float) -> np.ndarray:
        return _beta_vec(self.params, self.gamma, np.asarray(s, dtype=float), nu)

    def new_state(self, candidates=None) -> "GPState":
        return GPState(self.kernel, self.params.lam, candidates=candidates)


@dataclass(eq=False)
class GPState:
    """Posterior after ``t`` observations, grown one observation at a time.

    Parameters
    ----------
    kernel : KernelSpec
    lam : float
        Ridge term added to the Gram diagonal.
    candidates : array_like, optional
        Fixed ``(m, d)`` point set whose posterior is kept up to date.
    """

    kernel: KernelSpec
    lam: float
    candidates: np.ndarray | None = None
    capacity: int = 32
    jitter_used: bool = field(default=False, init=False)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        d = self.kernel.dim
        cap = max(int(self.capacity), 1)
        self.t = 0
        self._X = np.empty((cap, d))
        self._y = np.empty(cap)
        self._L = np.zeros((cap, cap))
        self._w = np.empty(cap)
        if self.candidates is not None:
            C = np.atleast_2d(np.asarray(self.candidates, dtype=float))
            if C.shape[1] != d:
                raise ValueError(f"candidates must have dimension {d}")
            self.candidates = C
            self._V = np.empty((cap, C.shape[0]))
            self._cand_mean = np.zeros(C.shape[0])
            self._cand_var = self.kernel.diag(C).copy()

    # -- storage ---------------------------------------------------------

    def _grow(self):
        cap = self._X.shape[0]
        new = 2 * cap
        X = np.empty((new, self._X.shape[1]))
        X[:cap] = self._X
        y = np.empty(new)
        y[:cap] = self._y
        Lf = np.zeros((new, new))
        Lf[:cap, :cap] = self._L
        w = np.empty(new)
        w[:cap] = self._w
        self._X, self._y, self._L, self._w = X, y, Lf, w
        if self.candidates is not None:
            V = np.empty((new, self._V.shape[1]))
            V[:cap] = self._V
            self._V = V

    @property
    def X(self) -> np.ndarray:
        return self._X[: self.t]

    @property
    def y(self) -> np.ndarray:
        return self._y[: self.t]

    @property
    def chol(self) -> np.ndarray:
        """Lower-triangular factor of ``K + lam I`` for the current data."""
        return self._L[: self.t, : self.t]

    # -- updates ---------------------------------------------------------

    def update(self, x, y: float, index: int | None = None) -> "GPState":
        """Append one observation, extending the factor by a single row.

        ``index`` names the candidate equal to ``x``; the new factor row is
        then read from the cached ``V`` instead of a triangular solve.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.kernel.dim:
            raise ValueError(f"expected a point of dimension {self.kernel.dim}")
        y = float(y)
        if not math.isfinite(y):
            raise NumericalError(f"non-finite observation {y!r}")
        n = self.t
        if n == self._X.shape[0]:
            self._grow()
        if n == 0:
            l = np.empty(0)
        elif index is not None and self.candidates is not None:
            l = self._V[:n, index].copy()
        else:
            kx = self.kernel.matrix(self._X[:n], x[None, :])[:, 0]
            l = solve_triangular(self._L[:n, :n], kx, lower=True, check_finite=False)
        # unit-variance kernels: k(x, x) = 1
        piv2 = 1.0 + self.lam - float(l @ l)
        if not piv2 > 0:
            piv2 += JITTER
            self.jitter_used = True
            if not piv2 > 0:
                raise NumericalError("non-positive pivot while extending the Gram factor")
        piv = math.sqrt(piv2)
        self._X[n] = x
        self._y[n] = y
        self._L[n, :n] = l
        self._L[n, n] = piv
        w_new = (y - float(l @ self._w[:n])) / piv
        self._w[n] = w_new
        if self.candidates is not None:
            kc = self.kernel.matrix(x[None, :], self.candidates)[0]
            row = (kc - l @ self._V[:n]) / piv if n else kc / piv
            self._V[n] = row
            self._cand_mean += row * w_new
            self._cand_var -= row * row
        self.t = n + 1
        return self

    # -- queries ---------------------------------------------------------

    def mean_var(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and variance at arbitrary points (fresh solve)."""
        X = self.kernel._check(X)
        prior = self.kernel.diag(X)
        if self.t == 0:
            return np.zeros(X.shape[0]), prior
        Kx = self.kernel.matrix(self.X, X)
        Vx = solve_triangular(self.chol, Kx, lower=True, check_finite=False)
        mu = Vx.T @ self._w[: self.t]
        var = prior - np.einsum("ij,ij->j", Vx, Vx)
        return mu, _clamp_var(var)

    def candidate_mean_sd(self) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and standard deviation over the candidate set."""
        if self.candidates is None:
            raise ValueError("state was built without candidates")
        return self._cand_mean.copy(), np.sqrt(_clamp_var(self._cand_var))


def _clamp_var(var: np.ndarray) -> np.ndarray:
    if np.any(var < -1e-6):
        raise NumericalError(f"posterior variance {var.min():.3e} is negative")
    return np.maximum(var, 0.0)


def posterior_update(state: GPState, x, y: float) -> GPState:
    """Add ``(x, y)`` to ``state`` and return it."""
    return state.update(x, y)


def posterior_mean_sd(state: GPState, x) -> tuple[float, float]:
    """Posterior mean and standard deviation at a single point."""
    mu, var = state.mean_var(np.asarray(x, dtype=float).reshape(1, -1))
    return float(mu[0]), float(math.sqrt(var[0]))
