"""
Experiment Runner - Shared plumbing for the experiment kinds
"""

import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent))

from experiment_models import ExperimentConfig
from montecarlo import ExperimentResult, PointSpec, estimate_rate, results_frame

logger = logging.getLogger("pfsr_sim")


@dataclass
class RunOutput:
    """Rows and extra tables produced by one experiment run"""
    results: List[ExperimentResult] = field(default_factory=list)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    messages: List[str] = field(default_factory=list)

    def results_table(self) -> pd.DataFrame:
        return results_frame(self.results)

    def row_counts(self) -> Dict[str, int]:
        counts = {"results.csv": len(self.results)}
        counts.update({f"{name}.csv": len(frame) for name, frame in self.tables.items()})
        return counts


class ExperimentRunner:
    """
    Base class: holds the config plus the command-line overrides.

    Grid point g of every curve draws its trajectories from stream tag
    g + 1, so the same point in two modes or schedules sees the same
    random numbers.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        seed: Optional[int] = None,
        workers: Optional[int] = None,
        shots: Optional[int] = None,
        progress: bool = False,
    ):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.workers = workers or config.effective_workers
        self.shots = shots or config.shots
        self.progress = progress

    def run(self) -> RunOutput:
        raise NotImplementedError

    def point(self, spec: PointSpec, grid_index: int) -> ExperimentResult:
        return estimate_rate(
            spec,
            self.shots,
            self.seed,
            tag=grid_index + 1,
            workers=self.workers,
            experiment_id=self.config.experiment_id,
            max_trajectory_errors=self.config.max_trajectory_errors,
            progress=self.progress,
        )
