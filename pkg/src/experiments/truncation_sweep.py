"""
Truncation Sweep - Logical rates and entry counts under amplitude cutoffs
"""

import pandas as pd

from statistics_calculator import StatisticsCalculator

from .base import ExperimentRunner, RunOutput


class TruncationSweepRunner(ExperimentRunner):
    """Same points at every cutoff; compares each cutoff with the smallest one"""

    def run(self) -> RunOutput:
        output = RunOutput()
        cutoffs = sorted(self.config.epsilons)
        for epsilon in cutoffs:
            for d in self.config.distances:
                for g, rate in enumerate(self.config.grid):
                    spec = self.config.point_spec(d, rate, epsilon=epsilon)
                    output.results.append(self.point(spec, g))
        output.tables["truncation_summary"] = self.summarize(output.results_table())
        output.messages.append(f"Cutoffs {cutoffs} at d={self.config.distances}")
        return output

    @staticmethod
    def summarize(frame: pd.DataFrame) -> pd.DataFrame:
        """z-score of every cutoff's rate against the smallest cutoff at the same point"""
        rows = []
        for (d, param), group in frame.groupby(["d", "param"]):
            group = group.sort_values("epsilon")
            reference = group.iloc[0]
            for _, row in group.iterrows():
                rows.append({
                    "d": d,
                    "param": param,
                    "epsilon": row["epsilon"],
                    "rate": row["rate"],
                    "stderr": row["stderr"],
                    "max_entries": row["max_entries"],
                    "mean_max_entries": row["mean_max_entries"],
                    "entry_ratio": reference["max_entries"] / max(row["max_entries"], 1),
                    "z_vs_smallest": StatisticsCalculator.z_difference(
                        row["rate"], row["stderr"], reference["rate"], reference["stderr"]
                    ),
                })
        return pd.DataFrame(rows)
