"""Tests for the gamma / normal distribution machinery.

Expected values come from independent oracles: adaptive quadrature for
normalization, bisection on the CDF for quantiles, and a high-precision
erf series for the normal quantile constant.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from mluq.distributions import (
    GammaParams,
    gamma_cdf,
    gamma_inv_cdf,
    gamma_pdf,
    memoryless_transform,
    normal_cdf,
    normal_inv_cdf,
)

CONCRETE = GammaParams(shape=7.1633, scale=4.1880e9)
STEEL = GammaParams(shape=934.2, scale=0.214e9)


def bisect_quantile(u, p, lo=0.0, hi=None, iters=200):
    """Independent quantile oracle: plain bisection on gamma_cdf."""
    if hi is None:
        hi = p.mean() + 50.0 * p.std()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if gamma_cdf(mid, p) < u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestGammaParams:
    def test_moments(self):
        assert CONCRETE.mean() == pytest.approx(3.0e10, rel=1e-4)
        assert CONCRETE.std() == pytest.approx(11.2e9, rel=1e-2)
        assert STEEL.mean() == pytest.approx(200e9, rel=1e-3)
        assert STEEL.std() == pytest.approx(6.543e9, rel=1e-3)

    @pytest.mark.parametrize("shape,scale", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (np.inf, 1.0)])
    def test_invalid_params_rejected(self, shape, scale):
        with pytest.raises(ValueError):
            GammaParams(shape=shape, scale=scale)


class TestGammaPdf:
    def test_positive_at_mean(self):
        assert gamma_pdf(CONCRETE.mean(), CONCRETE) > 0.0

    def test_exponential_at_origin(self):
        assert gamma_pdf(0.0, GammaParams(1.0, 1.0)) == pytest.approx(1.0)

    def test_normalization_by_quadrature(self):
        # adaptive quadrature oracle over [0, 1e12]
        val, _ = quad(lambda x: gamma_pdf(x, CONCRETE), 0.0, 1e12, limit=200)
        assert val == pytest.approx(1.0, abs=1e-6)

    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValueError):
            gamma_pdf(-1.0, CONCRETE)
        with pytest.raises(ValueError):
            gamma_pdf(np.nan, CONCRETE)


class TestGammaCdfInverse:
    def test_cdf_boundaries(self):
        assert gamma_cdf(0.0, CONCRETE) == 0.0
        assert gamma_cdf(1e14, CONCRETE) == pytest.approx(1.0, abs=1e-12)

    def test_exponential_closed_form(self):
        p = GammaParams(1.0, 1.0)
        assert gamma_inv_cdf(1.0 - np.exp(-1.0), p) == pytest.approx(1.0, rel=1e-12)

    def test_steel_median_against_bisection_oracle(self):
        median = gamma_inv_cdf(0.5, STEEL)
        assert abs(gamma_cdf(median, STEEL) - 0.5) < 1e-10
        oracle = bisect_quantile(0.5, STEEL)
        assert median == pytest.approx(oracle, rel=1e-9)

    @pytest.mark.parametrize("seed", range(4))
    def test_roundtrip_over_random_params(self, seed):
        # inverse is the exact functional inverse over extreme shape ranges
        rng = np.random.default_rng(1234 + seed)
        shape = float(np.exp(rng.uniform(np.log(0.5), np.log(2000.0))))
        scale = float(np.exp(rng.uniform(np.log(1e-3), np.log(1e10))))
        p = GammaParams(shape, scale)
        # central 99.99% mass
        u = np.linspace(5e-5, 1.0 - 5e-5, 201)
        x = gamma_inv_cdf(u, p)
        x_back = gamma_inv_cdf(gamma_cdf(x, p), p)
        np.testing.assert_allclose(x_back, x, rtol=1e-10)

    def test_domain_errors(self):
        for bad in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ValueError):
                gamma_inv_cdf(bad, CONCRETE)


class TestNormal:
    def test_cdf_symmetry(self):
        assert normal_cdf(0.0) == pytest.approx(0.5)
        y = np.linspace(-6.0, 6.0, 41)
        np.testing.assert_allclose(normal_cdf(y) + normal_cdf(-y), 1.0, atol=1e-15)

    def test_quantile_constant_against_series_oracle(self):
        # oracle: Newton on a 60-term Taylor series for erf, independent of scipy
        def erf_series(z):
            total, term = 0.0, z
            for k in range(60):
                if k > 0:
                    term *= -z * z / k
                total += term / (2 * k + 1)
            return 2.0 / np.sqrt(np.pi) * total

        def cdf_series(y):
            return 0.5 * (1.0 + erf_series(y / np.sqrt(2.0)))

        y = 2.0
        for _ in range(60):
            pdf = np.exp(-0.5 * y * y) / np.sqrt(2 * np.pi)
            y -= (cdf_series(y) - 0.975) / pdf
        assert y == pytest.approx(1.959964, abs=1e-6)
        assert normal_inv_cdf(0.975) == pytest.approx(y, abs=1e-9)
        assert abs(normal_inv_cdf(0.975) - 1.959964) < 1e-5

    def test_roundtrip(self):
        # rel 1e-9 is achievable up to ~5.75 sigma; beyond that the CDF value
        # itself only carries ~eps/pdf(y) of quantile information in float64
        y = np.linspace(-5.75, 5.75, 116)
        np.testing.assert_allclose(normal_inv_cdf(normal_cdf(y)), y, rtol=1e-9, atol=1e-10)
        y6 = np.array([-6.0, 6.0])
        np.testing.assert_allclose(normal_inv_cdf(normal_cdf(y6)), y6, atol=2e-8)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            normal_inv_cdf(0.0)
        with pytest.raises(ValueError):
            normal_inv_cdf(1.0)


class TestMemorylessTransform:
    def test_zero_maps_to_median(self):
        med = bisect_quantile(0.5, CONCRETE)
        assert memoryless_transform(0.0, CONCRETE) == pytest.approx(med, rel=1e-9)

    def test_strictly_increasing(self):
        # strict on the range where Phi is still injective in float64;
        # beyond ~7.6 sigma successive CDF values collide at 1 - ulp
        y = np.linspace(-7.5, 7.5, 1000)
        g = memoryless_transform(y, CONCRETE)
        assert np.all(np.diff(g) > 0.0)
        g_tail = memoryless_transform(np.array([7.5, 8.0]), CONCRETE)
        assert g_tail[1] >= g_tail[0]

    def test_extreme_inputs_stay_positive_finite(self):
        g = memoryless_transform(np.array([-8.0, 8.0]), CONCRETE)
        assert np.all(g > 0.0) and np.all(np.isfinite(g))

    def test_sample_mean_matches_gamma_mean(self):
        # Monte Carlo oracle: 1e6 draws, mean within 3 standard errors
        rng = np.random.default_rng(42)
        y = rng.standard_normal(1_000_000)
        vals = memoryless_transform(y, CONCRETE)
        se = CONCRETE.std() / np.sqrt(len(vals))
        assert abs(vals.mean() - CONCRETE.mean()) < 3.0 * se

    @pytest.mark.parametrize("p", [CONCRETE, STEEL, GammaParams(2.0, 0.5)])
    def test_transformed_draws_pass_ks(self, p):
        # empirical CDF of 1e5 transformed normals vs gamma CDF, alpha = 0.01
        rng = np.random.default_rng(7)
        n = 100_000
        vals = np.sort(memoryless_transform(rng.standard_normal(n), p))
        ecdf_hi = np.arange(1, n + 1) / n
        ecdf_lo = np.arange(0, n) / n
        cdf = gamma_cdf(vals, p)
        d = max(np.max(np.abs(ecdf_hi - cdf)), np.max(np.abs(cdf - ecdf_lo)))
        d_crit = 1.63 / np.sqrt(n)  # Kolmogorov critical value at alpha = 0.01
        assert d < d_crit
