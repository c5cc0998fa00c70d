import numpy as np
import pytest
from numpy.testing import assert_allclose

from proxlab.errors import DimensionMismatch, NotSpd
from proxlab.numerics import (SpdMetric, Tolerances, as_vector, metric_norm, pairing,
                              random_spd_matrix, spd_solve)


def test_pairing_values():
    assert pairing([1.0, 2.0], [3.0, 4.0]) == 11.0
    assert pairing([0.0, 0.0], [5.0, -1.0]) == 0.0
    assert pairing([1.0, 1.0, 1.0], [2.0, 2.0, 2.0]) == 6.0


def test_pairing_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        pairing([1.0, 2.0], [1.0, 2.0, 3.0])


def test_pairing_symmetry_sampled():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a = rng.standard_normal(4)
        b = rng.standard_normal(4)
        assert pairing(a, b) == pytest.approx(pairing(b, a), rel=1e-14, abs=1e-14)


def test_metric_norm_values():
    eye = SpdMetric.identity(2)
    assert metric_norm(eye, [3.0, 4.0]) == pytest.approx(5.0)
    assert metric_norm(SpdMetric.diagonal([4.0, 1.0]), [1.0, 0.0]) == pytest.approx(2.0)
    assert metric_norm(SpdMetric.diagonal([3.0, 7.0]), [0.0, 0.0]) == 0.0


def test_spd_solve_values():
    assert_allclose(spd_solve(SpdMetric.identity(2), [7.0, -2.0]), [7.0, -2.0])
    assert_allclose(spd_solve(SpdMetric.diagonal([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])
    m = SpdMetric([[2.0, 1.0], [1.0, 2.0]])
    x = spd_solve(m, [3.0, 3.0])
    assert_allclose(x, [1.0, 1.0], atol=1e-12)
    assert_allclose(m.apply(x), [3.0, 3.0], atol=1e-12)  # multiply-back oracle


def test_spd_solve_roundtrip_sampled():
    rng = np.random.default_rng(7)
    for _ in range(500):
        dim = int(rng.integers(1, 9))
        m = SpdMetric(random_spd_matrix(dim, 0.2, 4.0, rng))
        b = rng.standard_normal(dim)
        x = m.solve(b)
        assert np.linalg.norm(m.apply(x) - b) <= 1e-10 * (1.0 + np.linalg.norm(b))


def test_metric_norm_matches_pairing():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = SpdMetric(random_spd_matrix(3, 0.5, 2.0, rng))
        w = rng.standard_normal(3)
        assert m.norm(w) ** 2 == pytest.approx(pairing(m.apply(w), w), rel=1e-12, abs=1e-12)


def test_spd_rejects_bad_matrices():
    with pytest.raises(NotSpd):
        SpdMetric([[1.0, 2.0], [0.0, 1.0]])  # not symmetric
    with pytest.raises(NotSpd):
        SpdMetric([[1.0, 0.0], [0.0, -1.0]])  # indefinite
    with pytest.raises(NotSpd):
        SpdMetric(np.zeros((2, 2)))  # singular


def test_inv_norm_consistency():
    m = SpdMetric.diagonal([4.0, 1.0])
    # ||w||_{M^{-1}} with M = diag(4, 1): sqrt(w0^2/4 + w1^2)
    assert m.inv_norm([2.0, 1.0]) == pytest.approx(np.sqrt(2.0))


def test_as_vector_validation():
    with pytest.raises(ValueError):
        as_vector([1.0, np.nan])
    with pytest.raises(ValueError):
        as_vector([np.inf])
    with pytest.raises(DimensionMismatch):
        as_vector([1.0, 2.0], dim=3)


def test_tolerances_positive():
    with pytest.raises(ValueError):
        Tolerances(inner_residual=0.0)
    with pytest.raises(ValueError):
        Tolerances(membership=-1e-9)
    t = Tolerances()
    assert t.inner_residual == 1e-10 and t.membership == 1e-8 and t.zero_detect == 1e-8
