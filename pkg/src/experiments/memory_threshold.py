"""
Memory Threshold - Logical error curves across distances and channel modes
"""

from .base import ExperimentRunner, RunOutput


class MemoryThresholdRunner(ExperimentRunner):
    """One row per (mode, d, grid value)"""

    def run(self) -> RunOutput:
        output = RunOutput()
        for mode in self.config.modes:
            for d in self.config.distances:
                for g, rate in enumerate(self.config.grid):
                    spec = self.config.point_spec(d, rate, mode=mode)
                    output.results.append(self.point(spec, g))
        output.messages.append(
            f"{len(output.results)} points over d={self.config.distances} "
            f"in mode(s) {[m.value for m in self.config.modes]}"
        )
        return output
