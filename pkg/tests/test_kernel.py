import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpthreds.kernel import Family, GammaBound, KernelSpec, eval_kernel, gamma_bound

SE = KernelSpec(Family.SQUARED_EXPONENTIAL, 0.2, 1)
M25 = KernelSpec(Family.MATERN, 0.2, 1, 2.5)


def test_se_identity_and_known_distance():
    assert eval_kernel(SE, [0.3], [0.3]) == 1.0
    assert eval_kernel(SE, [0.1], [0.3]) == pytest.approx(math.exp(-0.5), abs=1e-12)
    assert eval_kernel(SE, [0.1], [0.3]) == pytest.approx(0.6065307, abs=1e-7)


def test_matern_identity_and_known_distance():
    assert eval_kernel(M25, [0.4], [0.4]) == 1.0
    expected = (1 + math.sqrt(5) + 5 / 3) * math.exp(-math.sqrt(5))
    assert eval_kernel(M25, [0.0], [0.2]) == pytest.approx(expected, abs=1e-12)
    assert eval_kernel(M25, [0.0], [0.2]) == pytest.approx(0.5240, abs=1e-4)


@pytest.mark.parametrize("nu,form", [(0.5, lambda r: math.exp(-r)), (1.5, lambda r: (1 + math.sqrt(3) * r) * math.exp(-math.sqrt(3) * r))])
def test_matern_low_orders(nu, form):
    k = KernelSpec(Family.MATERN, 0.3, 2, nu)
    x, y = np.array([0.1, 0.2]), np.array([0.4, 0.6])
    assert eval_kernel(k, x, y) == pytest.approx(form(np.linalg.norm(x - y) / 0.3), abs=1e-12)


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        eval_kernel(KernelSpec(dim=2), [0.1], [0.2, 0.3])
    with pytest.raises(ValueError):
        SE.matrix(np.zeros((3, 2)))


@pytest.mark.parametrize("bad", [dict(lengthscale=0.0), dict(dim=0), dict(family=Family.MATERN, nu=2.0)])
def test_invalid_specs(bad):
    with pytest.raises(ValueError):
        KernelSpec(**bad)


def test_family_parse():
    assert Family.parse("SE") is Family.SQUARED_EXPONENTIAL
    assert Family.parse("matern") is Family.MATERN
    with pytest.raises(ValueError):
        Family.parse("cosine")


@settings(max_examples=60, deadline=None)
@given(
    fam=st.sampled_from([(Family.SQUARED_EXPONENTIAL, 2.5), (Family.MATERN, 0.5), (Family.MATERN, 1.5), (Family.MATERN, 2.5)]),
    dim=st.integers(1, 4),
    n=st.integers(2, 50),
    ls=st.floats(0.05, 2.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_gram_psd_symmetric_unit_diagonal(fam, dim, n, ls, seed):
    k = KernelSpec(fam[0], ls, dim, fam[1])
    X = np.random.default_rng(seed).random((n, dim))
    K = k.matrix(X)
    assert np.array_equal(K, K.T)
    assert np.allclose(np.diag(K), 1.0)
    assert np.linalg.eigvalsh(K).min() >= -1e-8


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=2), st.lists(st.floats(0, 1), min_size=2, max_size=2))
def test_eval_symmetric_exactly(x, y):
    for k in (KernelSpec(dim=2), KernelSpec(Family.MATERN, 0.2, 2, 2.5)):
        assert eval_kernel(k, x, y) == eval_kernel(k, y, x)
        assert 0.0 <= eval_kernel(k, x, y) <= 1.0


def test_gamma_examples():
    assert gamma_bound(GammaBound(SE), 0) == pytest.approx(math.log(2) ** 2, abs=1e-12)
    assert gamma_bound(GammaBound(SE), 0) == pytest.approx(0.4805, abs=1e-4)
    m2 = GammaBound(KernelSpec(Family.MATERN, 0.2, 2, 2.5))
    # 100^(6/11) * log(102) evaluates to 57.0188
    assert gamma_bound(m2, 100) == pytest.approx(100 ** (6 / 11) * math.log(102), rel=1e-12)
    assert gamma_bound(m2, 100) == pytest.approx(57.0188, abs=1e-4)
    assert gamma_bound(GammaBound(SE, scale=2.5), 7) == pytest.approx(2.5 * math.log(9) ** 2)


@pytest.mark.parametrize("k", [SE, KernelSpec(dim=3), M25, KernelSpec(Family.MATERN, 0.2, 5, 0.5)])
def test_gamma_nondecreasing_exhaustive(k):
    vals = gamma_bound(GammaBound(k), np.arange(10_001))
    assert vals[0] >= 0
    assert np.all(np.diff(vals) >= 0)


def test_gamma_rejects_negative_time():
    with pytest.raises(ValueError):
        gamma_bound(GammaBound(SE), -1)
