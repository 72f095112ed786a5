"""
Statistics Calculator - Core calculation functions
Used by the Monte Carlo estimators and the report builder
"""

from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

Number = Union[int, float]


class StatisticsCalculator:
    """Statistical calculation utilities"""

    @staticmethod
    def binomial_stderr(failures: int, kept: int) -> float:
        """√(r(1-r)/N) for r = failures/kept; 0 when nothing was kept"""
        if kept <= 0:
            return 0.0
        rate = failures / kept
        return float(np.sqrt(rate * (1.0 - rate) / kept))

    @staticmethod
    def binomial_weights(n: int, p: float, ks: Optional[Sequence[int]] = None) -> np.ndarray:
        """
        P(k) = C(n,k) (1-p)^(n-k) p^k, evaluated with scipy's pmf

        Args:
            n: Number of independent fault locations
            p: Per-location fault probability
            ks: Fault counts to evaluate (default: 0..n)
        """
        ks = np.arange(n + 1) if ks is None else np.asarray(ks)
        return stats.binom.pmf(ks, n, p)

    @staticmethod
    def binomial_tail(n: int, p: float, k_max: int) -> float:
        """Σ_{k > k_max} P(k)"""
        return float(stats.binom.sf(k_max, n, p))

    @staticmethod
    def signed_mean(values: Sequence[Number], weights: Sequence[Number]) -> float:
        """Mean of w·v (quasiprobability estimator; weights are not normalized)"""
        products = np.asarray(values, dtype=float) * np.asarray(weights, dtype=float)
        return float(products.mean()) if products.size else 0.0

    @staticmethod
    def sample_stderr(samples: Sequence[Number]) -> float:
        samples = np.asarray(samples, dtype=float)
        if samples.size < 2:
            return 0.0
        return float(samples.std(ddof=1) / np.sqrt(samples.size))

    @staticmethod
    def geometric_mean(values: Sequence[Number]) -> float:
        return float(stats.gmean(np.asarray(values, dtype=float)))

    @staticmethod
    def crossing_point(
        params: Sequence[float],
        lower: Sequence[float],
        upper: Sequence[float],
        floor: float = 1e-12,
    ) -> Optional[float]:
        """
        First crossing of two rate curves, interpolating log(rate) against log(param)

        Args:
            params: Shared parameter grid (strictly increasing)
            lower: Rates of the smaller distance
            upper: Rates of the larger distance
            floor: Rates below this are clamped before taking logs

        Returns:
            Parameter value of the crossing, or None when the curves never cross
        """
        x = np.log(np.asarray(params, dtype=float))
        a = np.log(np.maximum(np.asarray(lower, dtype=float), floor))
        b = np.log(np.maximum(np.asarray(upper, dtype=float), floor))
        gap = b - a
        for i in range(len(x) - 1):
            if gap[i] == 0.0 and gap[i + 1] == 0.0:
                continue
            if gap[i] == 0.0:
                return float(np.exp(x[i]))
            if gap[i] < 0.0 < gap[i + 1] or gap[i] > 0.0 > gap[i + 1]:
                t = gap[i] / (gap[i] - gap[i + 1])
                return float(np.exp(x[i] + t * (x[i + 1] - x[i])))
        if gap[-1] == 0.0 and np.any(gap != 0.0):
            return float(np.exp(x[-1]))
        return None

    @staticmethod
    def resample_rates(failures: Sequence[int], kept: Sequence[int], rng: np.random.Generator) -> np.ndarray:
        """Parametric bootstrap draw of per-point binomial counts"""
        kept = np.asarray(kept)
        rates = np.asarray(failures) / np.maximum(kept, 1)
        return rng.binomial(kept, rates) / np.maximum(kept, 1)

    @staticmethod
    def percentile_interval(samples: Sequence[float], level: float = 0.95) -> tuple:
        tail = 50.0 * (1.0 - level)
        return float(np.percentile(samples, tail)), float(np.percentile(samples, 100.0 - tail))

    @staticmethod
    def z_difference(rate_a: float, stderr_a: float, rate_b: float, stderr_b: float) -> float:
        """(a - b) in units of the combined standard error"""
        scale = np.hypot(stderr_a, stderr_b)
        if scale == 0:
            return 0.0 if rate_a == rate_b else float(np.sign(rate_a - rate_b) * np.inf)
        return float((rate_a - rate_b) / scale)


if __name__ == "__main__":
    print("=== Testing Statistics Calculator ===\n")

    weights = StatisticsCalculator.binomial_weights(3564, 1e-3)
    print(f"Σ P(k) at n=3564, p=1e-3: {weights.sum():.15f}")

    grid = [0.03, 0.05, 0.07, 0.09, 0.11]
    curve = lambda d: [(p / 0.07) ** ((d + 1) / 2) for p in grid]
    crossing = StatisticsCalculator.crossing_point(grid, curve(3), curve(5))
    print(f"Synthetic crossing: {crossing:.4f}")
