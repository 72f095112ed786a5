"""
Schedule Compare - Layered against parallel circuit-level extraction
"""

from montecarlo import NoCrossingError, estimate_threshold
from surface_code import MemoryMode

from .base import ExperimentRunner, RunOutput

SCHEDULES = (MemoryMode.CIRCUIT_LAYERED, MemoryMode.CIRCUIT_PARALLEL)


class ScheduleCompareRunner(ExperimentRunner):
    """Runs every point under both circuit-level schedules"""

    def run(self) -> RunOutput:
        output = RunOutput()
        for schedule in SCHEDULES:
            for d in self.config.distances:
                for g, rate in enumerate(self.config.grid):
                    spec = self.config.point_spec(d, rate, noise_model=schedule)
                    output.results.append(self.point(spec, g))

        frame = output.results_table()
        if len(self.config.distances) < 2:
            output.messages.append("Only one distance: schedule thresholds skipped")
            return output
        for schedule in SCHEDULES:
            rows = frame[frame["noise_model"] == schedule.value]
            try:
                estimate = estimate_threshold(rows, seed=self.seed)
                output.messages.append(f"{schedule.value}: threshold {estimate.describe()}")
            except NoCrossingError:
                output.messages.append(f"{schedule.value}: no crossing in the grid")
        return output
