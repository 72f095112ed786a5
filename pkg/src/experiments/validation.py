"""
Validation - Dry-run checks of an experiment config
"""

import math
from dataclasses import dataclass, field
from typing import List

from experiment_models import ExperimentConfig, ExperimentKind
from montecarlo import enumerate_faults
from noise_channels import ChannelKind
from surface_code import MemoryMode, build_code, check_schedule, circuit_level_schedule, memory_experiment, phenomenological_schedule

# Amplitude, history object and dict slot of one populated ket
BYTES_PER_ENTRY = 200

# Channels that only ever apply Z-type errors to the data
Z_TYPE_KINDS = (ChannelKind.COHERENT_Z, ChannelKind.PHASE_FLIP)


@dataclass
class ValidationReport:
    checks: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def lines(self) -> List[str]:
        out = [f"✓ {c}" for c in self.checks]
        out += [f"Warning: {w}" for w in self.warnings]
        out += [f"✗ {f}" for f in self.failures]
        return out


def _noise_models(config: ExperimentConfig) -> List[MemoryMode]:
    if config.kind == ExperimentKind.SCHEDULE_COMPARE:
        return [MemoryMode.CIRCUIT_LAYERED, MemoryMode.CIRCUIT_PARALLEL]
    return [config.noise_model]


def validate_config(config: ExperimentConfig) -> ValidationReport:
    """Code construction, schedule invariants, fault counts and a memory estimate per distance"""
    report = ValidationReport()
    report.checks.append(f"Config {config.experiment_id!r} ({config.kind.value}) parsed")
    if not config.kind.needs_code:
        oracle = config.oracle
        report.checks.append(
            f"Oracle suite: {oracle.circuits} circuits, n ≤ {oracle.max_qubits}, depth ≤ {oracle.depth}"
        )
        return report

    for d in config.distances:
        try:
            code = build_code(d)
        except ValueError as exc:
            report.failures.append(f"d={d}: {exc}")
            continue
        problems = code.check()
        if problems:
            report.failures.extend(f"d={d}: {p}" for p in problems)
        else:
            report.checks.append(f"d={d}: {code.num_data} data qubits, {code.num_stabilizers} stabilizers")

        for model in _noise_models(config):
            if model == MemoryMode.PHENOMENOLOGICAL:
                steps = phenomenological_schedule(code, config.origin)
            else:
                steps = circuit_level_schedule(code, model == MemoryMode.CIRCUIT_LAYERED, config.origin)
            schedule_problems = check_schedule(code, steps)
            if schedule_problems:
                report.failures.extend(f"d={d} {model.value}: {p}" for p in schedule_problems)
            else:
                report.checks.append(f"d={d} {model.value}: schedule of {len(steps)} steps is consistent")

            experiment = memory_experiment(d, config.basis, model, config.origin)
            faults = enumerate_faults(experiment)
            counts = ", ".join(f"{kind}={count}" for kind, count in sorted(faults.counts().items()))
            report.checks.append(f"d={d} {model.value}: {faults.n_locations} fault locations ({counts})")

            worst = 2 ** d
            megabytes = worst * BYTES_PER_ENTRY / 2 ** 20
            report.checks.append(f"d={d}: worst-case {worst} entries ≈ {megabytes:.2f} MiB per trajectory")

        if config.kind == ExperimentKind.IMPORTANCE_SAMPLING:
            window = config.importance.window(default_high=4 * d)
            floor = d if config.postselect else math.ceil(d / 2)
            if d not in window:
                report.warnings.append(
                    f"d={d}: importance window [{window.start}, {window.stop - 1}] excludes k={d}"
                )
            if window.start > floor:
                report.warnings.append(
                    f"d={d}: window starts above the zero-block floor k={floor}; "
                    f"contributions from k={floor}..{window.start - 1} are dropped"
                )

    if config.channel.kind in Z_TYPE_KINDS and config.basis == "Z":
        report.warnings.append(
            f"{config.channel.kind.value} commutes with the Z checks and Z_L; "
            "a Z-basis memory only fails through record flips (use basis \"X\")"
        )
    if config.kind == ExperimentKind.TRUNCATION_SWEEP and 0.0 not in config.epsilons:
        report.warnings.append("No ε = 0 reference in the truncation sweep")
    return report
