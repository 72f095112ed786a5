"""
Importance Sampling - Fixed-fault-count estimates with adaptive shot allocation
"""

import math

import pandas as pd

from montecarlo import (
    ExperimentResult,
    FaultCountEstimate,
    allocate_shots,
    collect_fault_counts,
    importance_estimate,
)
from statistics_calculator import StatisticsCalculator

from .base import ExperimentRunner, RunOutput


class ImportanceSamplingRunner(ExperimentRunner):
    """
    Pilot every k in the window, spend the budget where P(k)·p_fail|k is
    largest, then evaluate the estimator on the grid. With ``shots`` set,
    every grid value is also sampled directly as a cross-check.
    """

    def run(self) -> RunOutput:
        output = RunOutput()
        counts, curves = [], []
        for d in self.config.distances:
            estimate, window = self.sample_distance(d)
            estimate.verify_zero_block()
            curve = importance_estimate(estimate, self.config.grid, (window.start, window.stop - 1))
            counts.append(estimate.to_frame().assign(d=d))
            curves.append(curve.assign(d=d, n_locations=estimate.n_locations))
            output.results.extend(self.curve_rows(d, estimate, curve))
            if window.start > estimate.zero_block_floor or window.stop - 1 < d:
                output.messages.append(
                    f"Warning: d={d} window [{window.start}, {window.stop - 1}] misses "
                    f"k={estimate.zero_block_floor}..{d}"
                )
            if self.shots:
                output.messages.extend(self.cross_check(d, curve, output))

        output.tables["fault_counts"] = pd.concat(counts, ignore_index=True)
        output.tables["importance_curves"] = pd.concat(curves, ignore_index=True)
        return output

    def sample_distance(self, d: int):
        importance = self.config.importance
        spec = self.config.point_spec(d, importance.p_targets[0])
        n_locations = spec.experiment().num_locations
        window = importance.window(default_high=min(n_locations, 4 * d))
        window = range(window.start, min(window.stop, n_locations + 1))

        pilot = collect_fault_counts(
            spec, {k: importance.pilot_shots for k in window}, self.seed, self.workers, progress=self.progress
        )
        plan = allocate_shots(pilot, importance.p_targets, self.config.budget)
        plan = {k: shots for k, shots in plan.items() if k in window}
        estimate = collect_fault_counts(spec, plan, self.seed, self.workers, estimate=pilot, progress=self.progress)
        return estimate, window

    def curve_rows(self, d: int, estimate: FaultCountEstimate, curve: pd.DataFrame):
        samples = sum(estimate.samples.values())
        failures = sum(estimate.failures.values())
        discards = sum(estimate.discards.values())
        return [
            ExperimentResult(
                experiment_id=self.config.experiment_id,
                d=d,
                mode=self.config.channel.mode.value,
                channel=self.config.channel.kind.value,
                param=float(row.p),
                k_or_total="importance",
                shots=samples,
                failures=failures,
                discards=discards,
                rate=float(min(max(row.p_fail, 0.0), 1.0)),
                stderr=float(row.stderr),
                noise_model=self.config.noise_model.value,
            )
            for row in curve.itertuples()
        ]

    def cross_check(self, d: int, curve: pd.DataFrame, output: RunOutput):
        messages = []
        for g, row in enumerate(curve.itertuples()):
            direct = self.point(self.config.point_spec(d, row.p), g)
            output.results.append(direct)
            z = StatisticsCalculator.z_difference(row.p_fail, row.stderr, direct.rate, direct.stderr)
            flag = "" if math.isfinite(z) and abs(z) <= 3 else "  (outside 3σ)"
            messages.append(
                f"d={d} p={row.p:.4g}: importance {row.p_fail:.4g} ± {row.stderr:.2g}, "
                f"direct {direct.rate:.4g} ± {direct.stderr:.2g}, z={z:.2f}{flag}"
            )
        return messages
