"""
Basic tests for PFSR Simulator
Run with: python -m pytest tests/
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from statistics_calculator import StatisticsCalculator


def test_binomial_stderr():
    """Test binomial standard error"""
    calc = StatisticsCalculator()
    assert calc.binomial_stderr(25, 100) == pytest.approx(np.sqrt(0.25 * 0.75 / 100))
    assert calc.binomial_stderr(0, 0) == 0.0
    assert calc.binomial_stderr(0, 50) == 0.0


def test_binomial_weights_sum_to_one():
    """Test P(k) normalization for large location counts"""
    calc = StatisticsCalculator()
    for n in (10, 500, 3564, 10000):
        for p in (1e-4, 1e-3, 0.01, 0.1):
            assert calc.binomial_weights(n, p).sum() == pytest.approx(1.0, abs=1e-12)


def test_binomial_weights_selected_counts():
    """Test P(k) at chosen k and the tail beyond a cutoff"""
    calc = StatisticsCalculator()
    weights = calc.binomial_weights(20, 0.1, [0, 1])
    assert weights[0] == pytest.approx(0.9 ** 20)
    assert weights[1] == pytest.approx(20 * 0.1 * 0.9 ** 19)
    full = calc.binomial_weights(20, 0.1)
    assert calc.binomial_tail(20, 0.1, 5) == pytest.approx(full[6:].sum())


def test_signed_mean():
    """Test the unnormalized signed mean"""
    calc = StatisticsCalculator()
    assert calc.signed_mean([1, 1, 0], [1.5, -1.5, 1.5]) == pytest.approx(0.0)
    assert calc.signed_mean([], []) == 0.0


def test_sample_stderr_and_geometric_mean():
    """Test sample standard error and geometric mean"""
    calc = StatisticsCalculator()
    samples = [1.0, 2.0, 3.0, 4.0]
    assert calc.sample_stderr(samples) == pytest.approx(np.std(samples, ddof=1) / 2.0)
    assert calc.sample_stderr([1.0]) == 0.0
    assert calc.geometric_mean([1, 4, 16]) == pytest.approx(4.0)


def test_crossing_point_synthetic():
    """Test crossing of (p/0.07)^((d+1)/2) curves"""
    calc = StatisticsCalculator()
    grid = [0.03, 0.05, 0.08, 0.1]
    curve = lambda d: [0.5 * (p / 0.07) ** ((d + 1) / 2) for p in grid]
    assert calc.crossing_point(grid, curve(3), curve(5)) == pytest.approx(0.07, rel=1e-9)


def test_crossing_point_none():
    """Test curves that never cross"""
    calc = StatisticsCalculator()
    grid = [0.01, 0.02, 0.03]
    assert calc.crossing_point(grid, [0.1, 0.2, 0.3], [0.01, 0.02, 0.03]) is None
    assert calc.crossing_point(grid, [0.1, 0.2, 0.3], [0.1, 0.2, 0.3]) is None


def test_percentile_interval_and_z_difference():
    """Test bootstrap interval and z-score helpers"""
    calc = StatisticsCalculator()
    low, high = calc.percentile_interval(np.arange(101), level=0.9)
    assert (low, high) == (pytest.approx(5.0), pytest.approx(95.0))
    assert calc.z_difference(0.2, 0.03, 0.2, 0.04) == 0.0
    assert calc.z_difference(0.3, 0.03, 0.2, 0.04) == pytest.approx(2.0)
    assert calc.z_difference(0.3, 0.0, 0.2, 0.0) == np.inf


def test_resample_rates_shape():
    """Test parametric bootstrap keeps rates in [0, 1]"""
    calc = StatisticsCalculator()
    rng = np.random.default_rng(0)
    rates = calc.resample_rates([0, 5, 100], [100, 100, 100], rng)
    assert rates.shape == (3,)
    assert rates[0] == 0.0
    assert rates[2] == 1.0
    assert 0.0 <= rates[1] <= 1.0


if __name__ == "__main__":
    # Run tests manually
    print("Running tests...")

    test_binomial_stderr()
    print("✓ Binomial stderr test passed")

    test_binomial_weights_sum_to_one()
    print("✓ P(k) normalization test passed")

    test_binomial_weights_selected_counts()
    print("✓ P(k) selection test passed")

    test_signed_mean()
    print("✓ Signed mean test passed")

    test_sample_stderr_and_geometric_mean()
    print("✓ Stderr and geometric mean tests passed")

    test_crossing_point_synthetic()
    print("✓ Crossing test passed")

    test_crossing_point_none()
    print("✓ No-crossing test passed")

    test_percentile_interval_and_z_difference()
    print("✓ Interval test passed")

    test_resample_rates_shape()
    print("✓ Resample test passed")

    print("\n✅ All tests passed!")
