import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from cancornorm.moments import (
    MomentTable,
    Sample,
    central_moments,
    sample_cov,
    sample_mean,
    sample_third,
    sorted_multi_indices,
)


def brute_force_moment(x, index):
    """Independent oracle: direct loop over observations and index factors."""
    xc = x - x.mean(axis=0)
    total = 0.0
    for row in xc:
        prod = 1.0
        for i in index:
            prod *= row[i]
        total += prod
    return total / x.shape[0]


def test_sample_validation():
    with pytest.raises(ValueError):
        Sample(np.ones((1, 2)))
    with pytest.raises(ValueError):
        Sample(np.array([[1.0, np.nan], [2.0, 3.0]]))
    with pytest.raises(ValueError):
        Sample(np.ones(5))


def test_mean_two_points():
    assert_array_equal(sample_mean(np.array([[0.0, 0.0], [2.0, 2.0]])), [1.0, 1.0])


def test_mean_constant_sample():
    x = np.full((7, 3), 2.5)
    assert_array_equal(sample_mean(x), [2.5, 2.5, 2.5])


def test_mean_matches_brute_force():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5, 2))
    expected = [sum(x[:, j]) / 5 for j in range(2)]
    assert_allclose(sample_mean(x), expected, rtol=1e-12)


def test_cov_constant_sample_is_zero():
    assert_array_equal(sample_cov(np.full((4, 2), 3.0)), np.zeros((2, 2)))


def test_cov_univariate_hand_value():
    assert_allclose(sample_cov(np.array([[0.0], [2.0]])), [[2.0]])


def test_cov_matches_central_moments():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((23, 3))
    m = central_moments(x, 2)
    n = 23
    expected = np.array([[m.mu(i, j) * n / (n - 1) for j in range(3)] for i in range(3)])
    assert_allclose(sample_cov(x), expected, rtol=1e-13)


def test_third_moments_symmetric_sample_vanish():
    base = np.array([[1.0, -0.5], [0.3, 2.0], [-2.0, 0.7]])
    x = np.vstack([base, -base])  # exactly symmetric about 0
    t = sample_third(x)
    assert_allclose(t.values, 0.0, atol=1e-14)


def test_third_moments_univariate_normalization():
    rng = np.random.default_rng(2)
    x = rng.standard_exponential((11, 1))
    n = 11
    m = central_moments(x, 3)
    t = sample_third(x)
    assert_allclose(t.value(0, 0, 0), n**2 / ((n - 1) * (n - 2)) * m.mu(0, 0, 0), rtol=1e-13)


def test_third_moments_brute_force():
    rng = np.random.default_rng(3)
    x = rng.standard_exponential((17, 2))
    n = 17
    t = sample_third(x)
    for i, j, k in [(0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1)]:
        expected = n**2 / ((n - 1) * (n - 2)) * brute_force_moment(x, (i, j, k))
        assert_allclose(t.value(i, j, k), expected, rtol=1e-12)


def test_third_moments_need_three_observations():
    with pytest.raises(ValueError):
        sample_third(np.ones((2, 2)) + np.arange(4).reshape(2, 2))


def test_central_moments_constant_sample():
    m = central_moments(np.full((6, 2), 1.25), 4)
    for order in (2, 3, 4):
        for idx in sorted_multi_indices(2, order):
            assert m.mu(*idx) == 0.0


def test_central_moments_standard_normal_fourth():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((1_000_000, 1))
    m = central_moments(x, 4)
    assert abs(m.mu(0, 0, 0, 0) - 3.0) < 0.05


def test_central_moments_brute_force():
    rng = np.random.default_rng(5)
    x = rng.standard_exponential((19, 2))
    m = central_moments(x, 6)
    for idx in [(0, 0), (0, 1), (0, 0, 1, 1), (0, 1, 1, 1), (0, 0, 0, 1, 1, 1)]:
        assert_allclose(m.mu(*idx), brute_force_moment(x, idx), rtol=1e-12)


def test_moment_table_permutation_lookup():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((15, 3))
    m = central_moments(x, 4)
    assert m.mu(2, 0, 1) == m.mu(0, 1, 2)
    assert m.mu(1, 0, 1, 0) == m.mu(0, 0, 1, 1)


def test_translation_invariance():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((40, 3))
    shifted = x + np.array([10.0, -4.0, 0.5])
    m0 = central_moments(x, 6)
    m1 = central_moments(shifted, 6)
    for order in range(2, 7):
        for idx in sorted_multi_indices(3, order):
            assert_allclose(m1.mu(*idx), m0.mu(*idx), rtol=1e-10, atol=1e-10)


def test_scaling_covariance():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((30, 2))
    scale = np.array([2.0, -1.5])
    m0 = central_moments(x, 5)
    m1 = central_moments(x * scale, 5)
    for order in range(2, 6):
        for idx in sorted_multi_indices(2, order):
            factor = np.prod([scale[i] ** idx.count(i) for i in set(idx)])
            assert_allclose(m1.mu(*idx), factor * m0.mu(*idx), rtol=1e-11)


def test_row_permutation_bit_identical():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((31, 3))
    perm = rng.permutation(31)
    m0 = central_moments(x, 6)
    m1 = central_moments(x[perm], 6)
    for order in range(2, 7):
        for idx in sorted_multi_indices(3, order):
            assert m0.mu(*idx) == m1.mu(*idx)


def test_moment_table_completeness_enforced():
    with pytest.raises(ValueError):
        MomentTable(p=2, max_order=2, values={(0, 0): 1.0})
    with pytest.raises(ValueError):
        MomentTable(p=1, max_order=7, values={})
