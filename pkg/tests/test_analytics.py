import math

import numpy as np
import pytest
from scipy import integrate, stats

from dfs_scout.analytics import (
    FidelityDistParams,
    confidence_band,
    failure_probability,
    fidelity_cdf_exact,
    fidelity_cdf_paper,
    fidelity_pdf_exact,
    fidelity_pdf_paper,
    two_peak_summary,
)
from dfs_scout.rng import as_generator


def haar_fidelity_samples(n, d, seed):
    """Independent |<a|b>|^2 draws from raw complex Gaussians."""
    rng = as_generator(seed)
    a = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    b = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return np.abs(np.sum(a.conj() * b, axis=1)) ** 2


class TestExponentialApproximation:
    def test_normalization_by_quadrature(self):
        for d in (2, 3, 10, 20):
            total, err = integrate.quad(fidelity_pdf_paper, 0, 1, args=(d,), epsabs=1e-10)
            assert abs(total - 1.0) < 1e-8

    def test_value_at_zero(self):
        # direct evaluation: D / (1 - exp(-D)) at F=0
        assert fidelity_pdf_paper(0.0, 3) == pytest.approx(3 / (1 - math.exp(-3)), abs=1e-12)
        assert fidelity_pdf_paper(0.0, 3) == pytest.approx(3.157, abs=5e-4)

    def test_close_to_haar_law_at_large_dimension(self):
        samples = haar_fidelity_samples(100_000, 20, 1)
        ks = stats.kstest(samples, lambda f: np.vectorize(fidelity_cdf_paper)(f, 20)).statistic
        assert ks < 0.06

    def test_reports_gap_at_small_dimension(self):
        # the approximation is knowingly coarse at D=3; record, don't assert
        samples = haar_fidelity_samples(100_000, 3, 2)
        ks = stats.kstest(samples, lambda f: np.vectorize(fidelity_cdf_paper)(f, 3)).statistic
        print(f"exponential-law KS distance at D=3: {ks:.4f} (informational)")
        assert ks < 1.0

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            fidelity_pdf_paper(1.5, 3)


class TestExactHaarLaw:
    def test_qubit_case_is_uniform(self):
        for f in (0.0, 0.3, 0.9, 1.0):
            assert fidelity_pdf_exact(f, 2) == pytest.approx(1.0)

    def test_mean_by_quadrature(self):
        # moment of the Beta(1, D-1) law: mean must be 1/D
        for d in (2, 3, 4, 8):
            mean, err = integrate.quad(
                lambda f, dd=d: f * fidelity_pdf_exact(f, dd), 0, 1, epsabs=1e-12
            )
            assert mean == pytest.approx(1.0 / d, abs=1e-8)

    def test_normalization(self):
        for d in (2, 3, 4, 8):
            total, _ = integrate.quad(fidelity_pdf_exact, 0, 1, args=(d,), epsabs=1e-10)
            assert abs(total - 1.0) < 1e-8

    def test_matches_empirical_haar_fidelities(self):
        for d in (2, 3, 4):
            samples = haar_fidelity_samples(100_000, d, 10 + d)
            ks = stats.kstest(samples, lambda f, dd=d: np.vectorize(fidelity_cdf_exact)(f, dd)).statistic
            assert ks < 0.01

    def test_non_negative(self):
        for f in np.linspace(0, 1, 21):
            assert fidelity_pdf_exact(float(f), 5) >= 0.0
            assert fidelity_pdf_paper(float(f), 5) >= 0.0


class TestFailureProbability:
    def test_vanishes_at_large_shot_count(self):
        assert failure_probability(3, 10**12) < 1e-5

    def test_d3_n100_value(self):
        # oracle: tail mass of the exponential law above 1 - 1/sqrt(N)
        tail, _ = integrate.quad(fidelity_pdf_paper, 1 - 0.1, 1, args=(3,), epsabs=1e-12)
        value = failure_probability(3, 100)
        assert value == pytest.approx(tail, abs=1e-10)
        assert value == pytest.approx(0.01833, abs=5e-5)

    def test_inverse_sqrt_scaling(self):
        for n in (10_000, 100_000, 1_000_000):
            ratio = failure_probability(3, n) / failure_probability(3, 100 * n)
            assert abs(ratio - 10.0) < 1.5

    def test_monotonic_in_n_and_d(self):
        # decreasing in N; also decreasing in D, since the exponential law
        # concentrates near zero fidelity as the dimension grows and the tail
        # above the fixed 1 - 1/sqrt(N) threshold shrinks
        grid_n = [10, 100, 1000, 10_000]
        for d in (2, 3, 5, 8):
            values = [failure_probability(d, n) for n in grid_n]
            assert all(a > b for a, b in zip(values, values[1:]))
        for n in grid_n:
            values = [failure_probability(d, n) for d in (2, 3, 5, 8)]
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_params_type_validation(self):
        with pytest.raises(ValueError):
            FidelityDistParams(1, 100)
        with pytest.raises(ValueError):
            FidelityDistParams(3, 0)


class TestConfidenceBand:
    def test_constant_samples_zero_width(self):
        bands = confidence_band(np.full(100, 0.7))
        for lo, hi in bands.values():
            assert lo == hi == pytest.approx(0.7)

    def test_uniform_samples_match_order_statistics(self):
        rng = as_generator(5)
        samples = rng.uniform(size=10_000)
        bands = confidence_band(samples)
        lo, hi = bands[0.95]
        assert lo == pytest.approx(0.025, abs=0.01)
        assert hi == pytest.approx(0.975, abs=0.01)

    def test_nested(self):
        rng = as_generator(6)
        samples = rng.normal(size=500)
        bands = confidence_band(samples)
        assert bands[0.95][0] <= bands[0.63][0]
        assert bands[0.63][1] <= bands[0.95][1]

    def test_matches_type7_quantiles_exactly(self):
        rng = as_generator(7)
        samples = rng.uniform(size=321)
        bands = confidence_band(samples)
        assert bands[0.63][0] == float(np.quantile(samples, 0.185))
        assert bands[0.63][1] == float(np.quantile(samples, 0.815))

    def test_requires_enough_samples(self):
        with pytest.raises(ValueError, match="50"):
            confidence_band(np.ones(49))


class TestTwoPeakSummary:
    def test_all_high(self):
        out = two_peak_summary(np.ones(10))
        assert out == {"mass_low": 0.0, "mass_high": 1.0, "mass_mid": 0.0}

    def test_counting(self):
        out = two_peak_summary(np.array([0.05, 0.95, 0.5, 0.99]))
        assert out["mass_low"] == pytest.approx(0.25)
        assert out["mass_high"] == pytest.approx(0.5)
        assert out["mass_mid"] == pytest.approx(0.25)

    def test_masses_sum_to_one(self):
        rng = as_generator(8)
        out = two_peak_summary(rng.uniform(size=1000))
        assert out["mass_low"] + out["mass_high"] + out["mass_mid"] == pytest.approx(1.0)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            two_peak_summary(np.array([]))
