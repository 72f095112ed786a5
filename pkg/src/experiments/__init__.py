"""
Experiment runners, one per experiment kind
"""

from experiment_models import ExperimentConfig, ExperimentKind

from .base import ExperimentRunner, RunOutput
from .importance_sampling import ImportanceSamplingRunner
from .memory_threshold import MemoryThresholdRunner
from .oracle_suite import OracleSuiteRunner
from .schedule_compare import ScheduleCompareRunner
from .sparsity_profile import SparsityProfileRunner
from .truncation_sweep import TruncationSweepRunner

RUNNERS = {
    ExperimentKind.MEMORY_THRESHOLD: MemoryThresholdRunner,
    ExperimentKind.TRUNCATION_SWEEP: TruncationSweepRunner,
    ExperimentKind.SCHEDULE_COMPARE: ScheduleCompareRunner,
    ExperimentKind.IMPORTANCE_SAMPLING: ImportanceSamplingRunner,
    ExperimentKind.ORACLE_SUITE: OracleSuiteRunner,
    ExperimentKind.SPARSITY_PROFILE: SparsityProfileRunner,
}


def get_runner(config: ExperimentConfig, **overrides) -> ExperimentRunner:
    return RUNNERS[config.kind](config, **overrides)


__all__ = ["RUNNERS", "ExperimentRunner", "RunOutput", "get_runner"]
