"""
Sparsity Profile - Populated-ket growth of memory trajectories
"""

import numpy as np
import pandas as pd

from montecarlo import memory_chunk, run_chunks, summarize_tallies
from statistics_calculator import StatisticsCalculator

from .base import ExperimentRunner, RunOutput


class SparsityProfileRunner(ExperimentRunner):
    """Max entry count of every trajectory, checked against 2^d"""

    def run(self) -> RunOutput:
        output = RunOutput()
        rows = []
        for d in self.config.distances:
            for g, rate in enumerate(self.config.grid):
                spec = self.config.point_spec(d, rate)
                tallies = run_chunks(
                    memory_chunk, (spec, self.seed, g + 1), self.shots, self.workers, self.progress,
                    desc=f"d={d} profile",
                )
                output.results.append(
                    summarize_tallies(spec, tallies, self.config.experiment_id, self.config.max_trajectory_errors)
                )
                entries = np.array([t[3] for t in tallies if not t[5]], dtype=float)
                rows.append(self.profile_row(d, rate, entries))

        profile = pd.DataFrame(rows)
        output.tables["sparsity_profile"] = profile
        for row in profile.itertuples():
            status = "within" if row.within_bound else "EXCEEDS"
            output.messages.append(
                f"d={row.d} param={row.param:g}: max {row.max_entries:.0f}, "
                f"geometric mean {row.geometric_mean:.2f} ({status} 2^d = {row.bound})"
            )
        return output

    @staticmethod
    def profile_row(d: int, rate: float, entries: np.ndarray) -> dict:
        bound = 2 ** d
        return {
            "d": d,
            "param": rate,
            "trajectories": int(entries.size),
            "max_entries": float(entries.max()) if entries.size else 0.0,
            "geometric_mean": StatisticsCalculator.geometric_mean(entries) if entries.size else 0.0,
            "bound": bound,
            "within_bound": bool(entries.size == 0 or entries.max() <= bound),
            "half_exponent": float(2 ** (d / 2)),
        }
