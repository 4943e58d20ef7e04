import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import chi2_cdf_quadrature
from pqcnn import unistat
from pqcnn.unistat import (
    chi2_cdf,
    chi_square,
    histogram_hard,
    histogram_soft,
    histogram_soft_vjp,
    normalize,
    theta_soft_batch,
    uniformity_report,
)


def test_normalize():
    np.testing.assert_allclose(normalize([2, 4, 6]), [0, 0.5, 1])
    np.testing.assert_array_equal(normalize([3, 3, 3]), [0.5, 0.5, 0.5])
    h = normalize(np.random.default_rng(0).normal(size=50))
    assert h.min() == 0.0 and h.max() == 1.0
    with pytest.raises(ValueError):
        normalize([1.0])


def test_histogram_hard():
    np.testing.assert_allclose(histogram_hard([0, 0.5, 0.999], 2), [1 / 3, 2 / 3])
    m = 8
    mids = (np.arange(m) + 0.5) / m
    np.testing.assert_allclose(histogram_hard(mids, m), np.full(m, 1 / m))
    # last bin is closed at 1
    np.testing.assert_allclose(histogram_hard([1.0, 0.0], 4), [0.5, 0, 0, 0.5])
    p = histogram_hard(np.random.default_rng(1).random(1000), 16)
    assert abs(p.sum() - 1) < 1e-12
    with pytest.raises(ValueError):
        histogram_hard([0.5], 1)


def test_chi_square_closed_forms():
    for m in (2, 4, 16):
        assert chi_square(np.full(m, 1 / m)) == pytest.approx(0.0, abs=1e-15)
        one_bin = np.zeros(m)
        one_bin[0] = 1.0
        assert chi_square(one_bin) == pytest.approx(m - 1, abs=1e-12)
    with pytest.raises(ValueError):
        chi_square([0.5, 0.6])


def test_chi_square_direct_summation_oracle():
    rng = np.random.default_rng(3)
    for _ in range(50):
        m = int(rng.integers(2, 30))
        p = rng.random(m)
        p /= p.sum()
        expected = sum((pj - 1 / m) ** 2 / (1 / m) for pj in p)
        assert chi_square(p) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=2, max_size=20), st.randoms())
def test_chi_square_permutation_invariant(weights, rnd):
    p = np.array(weights) / sum(weights)
    q = list(p)
    rnd.shuffle(q)
    assert chi_square(q) == pytest.approx(chi_square(p), abs=1e-12)


def test_chi2_cdf_basic():
    assert chi2_cdf(0.0, 1) == 0.0
    assert chi2_cdf(0.0, 17) == 0.0
    assert chi2_cdf(2.0, 2) == pytest.approx(0.6321205588285577, abs=1e-15)
    with pytest.raises(ValueError):
        chi2_cdf(-1.0, 3)
    with pytest.raises(ValueError):
        chi2_cdf(1.0, 0)


@pytest.mark.parametrize("dof", [1, 2, 3, 5, 10, 15, 30])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.0, 7.5, 15.0, 30.0, 60.0])
def test_chi2_cdf_matches_quadrature(x, dof):
    assert abs(chi2_cdf(x, dof) - chi2_cdf_quadrature(x, dof)) < 1e-8


def test_chi2_cdf_monotone_and_tends_to_one():
    for dof in (1, 4, 15, 40):
        xs = np.linspace(0, 5 * dof, 400)
        vals = [chi2_cdf(x, dof) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert abs(chi2_cdf(50.0 * dof, dof) - 1.0) < 1e-8


def test_chi2_pdf_is_cdf_derivative():
    for dof in (1, 3, 15):
        for x in (0.3, 2.0, 11.0):
            h = 1e-6
            fd = (chi2_cdf(x + h, dof) - chi2_cdf(x - h, dof)) / (2 * h)
            assert unistat.chi2_pdf(x, dof) == pytest.approx(fd, rel=1e-6)


def test_uniformity_report_equal_bin_coverage_is_uniform():
    m = 8
    # after min-max scaling these land one per bin, four times over
    rep = uniformity_report(np.tile((np.arange(m) + 0.5) / m, 4), m)
    assert rep.chi_square == pytest.approx(0.0, abs=1e-12)
    assert rep.theta == pytest.approx(0.0, abs=1e-12)
    assert rep.uniform
    assert rep.dof == m - 1 and rep.bin_count == m


def test_uniformity_report_constant_vector():
    for m in (3, 4, 16):
        rep = uniformity_report([5.0] * 20, m)
        assert rep.chi_square == pytest.approx(m - 1)
        assert rep.theta == pytest.approx(chi2_cdf(m - 1, m - 1))
        assert rep.theta > 0.05
        assert not rep.uniform


def test_uniformity_report_cross_check():
    values = np.random.default_rng(2024).random(64)
    m = 16
    # independent recomputation with numpy's histogram and the quadrature CDF
    counts, _ = np.histogram((values - values.min()) / np.ptp(values), bins=m, range=(0, 1))
    p = counts / counts.sum()
    chi2 = m * np.sum((p - 1 / m) ** 2)
    theta = chi2_cdf_quadrature(chi2, m - 1)
    rep = uniformity_report(values, m)
    assert rep.chi_square == pytest.approx(chi2, abs=1e-12)
    assert rep.theta == pytest.approx(theta, abs=1e-10)
    assert rep.uniform == (theta < 0.05)


def test_report_invariants_random():
    rng = np.random.default_rng(5)
    for _ in range(30):
        rep = uniformity_report(rng.normal(size=40) ** 3, 8)
        assert 0.0 <= rep.theta <= 1.0
        assert rep.chi_square >= 0.0
        assert rep.uniform == (rep.theta < 0.05)


def test_soft_histogram_limit():
    m = 10
    rng = np.random.default_rng(8)
    mids = (np.arange(m) + 0.5) / m
    np.testing.assert_allclose(histogram_soft(mids, m, 1e-4), histogram_hard(mids, m), atol=1e-3)
    # random samples kept away from bin edges
    h = rng.random(300)
    frac = (h * m) % 1.0
    h = h[(frac > 0.05) & (frac < 0.95)]
    np.testing.assert_allclose(histogram_soft(h, m, 1e-4), histogram_hard(h, m), atol=1e-3)


def test_soft_histogram_normalized():
    for bw in (1e-3, 0.05, 0.5):
        p = histogram_soft([0.37], 6, bw)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
    p = histogram_soft(np.random.default_rng(0).random((4, 30)), 6, 0.02)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
    with pytest.raises(ValueError):
        histogram_soft([0.5], 4, 0.0)


def test_soft_histogram_gradient_finite_differences():
    rng = np.random.default_rng(4)
    h = rng.random(12)
    m, bw = 5, 0.05
    weights = rng.normal(size=m)
    analytic = histogram_soft_vjp(h, m, bw, weights)
    numeric = np.zeros_like(h)
    eps = 1e-6
    for i in range(h.size):
        hp, hm = h.copy(), h.copy()
        hp[i] += eps
        hm[i] -= eps
        numeric[i] = (weights @ histogram_soft(hp, m, bw) - weights @ histogram_soft(hm, m, bw)) / (2 * eps)
    rel = np.abs(analytic - numeric) / np.maximum(np.abs(numeric), 1e-7)
    assert rel.max() < 1e-4


def test_theta_soft_batch_gradient_finite_differences():
    rng = np.random.default_rng(6)
    y = rng.normal(size=(3, 10))
    m, bw = 4, 0.05
    theta, grad = theta_soft_batch(y, m, bw)
    eps = 1e-6
    numeric = np.zeros_like(y)
    for idx in np.ndindex(y.shape):
        yp, ym = y.copy(), y.copy()
        yp[idx] += eps
        ym[idx] -= eps
        numeric[idx] = (
            theta_soft_batch(yp, m, bw, need_grad=False)[0][idx[0]]
            - theta_soft_batch(ym, m, bw, need_grad=False)[0][idx[0]]
        ) / (2 * eps)
    rel = np.abs(grad - numeric) / np.maximum(np.maximum(np.abs(grad), np.abs(numeric)), 1e-7)
    assert rel.max() < 1e-4


def test_theta_soft_tracks_hard_at_small_bandwidth():
    rng = np.random.default_rng(10)
    y = rng.random((20, 64)) ** 2
    soft, _ = theta_soft_batch(y, 16, 1e-3, need_grad=False)
    hard = unistat.theta_hard_batch(y, 16)
    assert np.max(np.abs(soft - hard)) < 0.05
