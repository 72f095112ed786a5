"""
Experiment Models - Data structures for experiment configurations
"""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from montecarlo import PointSpec
from noise_channels import PAULI_KINDS, QUASIPROBABILITY_KINDS, TWIRLABLE_KINDS, ChannelKind, ChannelMode, NoiseChannel
from surface_code import SWEEP_ORIGINS, MemoryMode

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field_path`` names the offending field"""

    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path
        self.message = message


class ExperimentKind(Enum):
    """Kinds of experiment the runner knows"""
    MEMORY_THRESHOLD = "memory_threshold"
    TRUNCATION_SWEEP = "truncation_sweep"
    SCHEDULE_COMPARE = "schedule_compare"
    IMPORTANCE_SAMPLING = "importance_sampling"
    ORACLE_SUITE = "oracle_suite"
    SPARSITY_PROFILE = "sparsity_profile"

    @property
    def needs_code(self) -> bool:
        return self != ExperimentKind.ORACLE_SUITE


def _enum(enum_cls, value, path: str):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        allowed = ", ".join(member.value for member in enum_cls)
        raise ConfigError(path, f"{value!r} is not one of {{{allowed}}}") from None


@dataclass
class ChannelSpec:
    """Channel kind and application mode; the strength comes from the grid"""
    kind: ChannelKind
    mode: ChannelMode = ChannelMode.EXACT

    def __post_init__(self):
        self.kind = _enum(ChannelKind, self.kind, "channel.kind")
        self.mode = _enum(ChannelMode, self.mode, "channel.mode")
        if self.kind == ChannelKind.MEASUREMENT_FLIP:
            raise ConfigError("channel.kind", "measurement_flip is not a qubit channel")
        if self.mode == ChannelMode.PTA and self.kind not in TWIRLABLE_KINDS | PAULI_KINDS:
            raise ConfigError("channel.mode", f"pta is not defined for {self.kind.value}")
        if self.mode == ChannelMode.QUASIPROBABILITY and self.kind not in QUASIPROBABILITY_KINDS:
            raise ConfigError("channel.mode", f"quasiprobability is not defined for {self.kind.value}")

    def build(self, rate: float, mode: Optional[ChannelMode] = None) -> NoiseChannel:
        return NoiseChannel.from_rate(self.kind, rate, mode or self.mode)

    def to_dict(self) -> Dict[str, str]:
        return {"kind": self.kind.value, "mode": self.mode.value}


@dataclass
class ImportanceSpec:
    """Fixed-k sampling window and targets"""
    p_targets: List[float]
    k_min: Optional[int] = None
    k_max: Optional[int] = None
    pilot_shots: int = 200

    def __post_init__(self):
        if not self.p_targets:
            raise ConfigError("importance.p_targets", "at least one target rate is required")
        if any(not 0 < p < 1 for p in self.p_targets):
            raise ConfigError("importance.p_targets", "target rates must lie in (0, 1)")
        if self.k_min is not None and self.k_min < 0:
            raise ConfigError("importance.k_min", "must be non-negative")
        if self.k_min is not None and self.k_max is not None and self.k_max < self.k_min:
            raise ConfigError("importance.k_max", "must be at least k_min")
        if self.pilot_shots < 1:
            raise ConfigError("importance.pilot_shots", "must be at least 1")

    def window(self, default_high: int) -> range:
        low = self.k_min if self.k_min is not None else 0
        high = self.k_max if self.k_max is not None else default_high
        return range(low, high + 1)


@dataclass
class OracleSpec:
    """Random-circuit oracle suite sizes"""
    circuits: int = 500
    max_qubits: int = 8
    depth: int = 40

    def __post_init__(self):
        if self.circuits < 1:
            raise ConfigError("oracle.circuits", "must be at least 1")
        if not 1 <= self.max_qubits <= 12:
            raise ConfigError("oracle.max_qubits", "must lie in [1, 12]")
        if self.depth < 1:
            raise ConfigError("oracle.depth", "must be at least 1")


@dataclass
class ExperimentConfig:
    """One experiment: what to sweep, how many shots, where results go"""

    # Identification
    experiment_id: str
    kind: ExperimentKind

    # Sweep
    distances: List[int] = field(default_factory=list)
    grid: List[float] = field(default_factory=list)
    channel: Optional[ChannelSpec] = None
    noise_model: MemoryMode = MemoryMode.PHENOMENOLOGICAL
    basis: str = "Z"
    epsilon: float = 0.0

    # Sampling
    shots: Optional[int] = None
    budget: Optional[int] = None
    seed: int = 0
    workers: Optional[int] = None
    output: str = "results"

    # Optional blocks
    compare_modes: List[ChannelMode] = field(default_factory=list)
    epsilons: List[float] = field(default_factory=list)
    importance: Optional[ImportanceSpec] = None
    oracle: Optional[OracleSpec] = None
    postselect: bool = False
    p_meas: Optional[float] = None
    origin: str = "top_left"
    max_trajectory_errors: int = 0
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        """Coerce nested blocks, then validate"""
        self.kind = _enum(ExperimentKind, self.kind, "kind")
        self.noise_model = _enum(MemoryMode, self.noise_model, "noise_model")
        if isinstance(self.channel, dict):
            self.channel = _build_block(ChannelSpec, self.channel, "channel")
        if isinstance(self.importance, dict):
            self.importance = _build_block(ImportanceSpec, self.importance, "importance")
        if isinstance(self.oracle, dict):
            self.oracle = _build_block(OracleSpec, self.oracle, "oracle")
        self.compare_modes = [
            _enum(ChannelMode, m, f"compare_modes[{i}]") for i, m in enumerate(self.compare_modes)
        ]
        self.distances = [int(d) for d in self.distances]
        self.grid = [float(p) for p in self.grid]
        self.epsilons = [float(e) for e in self.epsilons]
        self._validate()

    def _validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError("schema_version", f"unsupported version {self.schema_version} (expected {SCHEMA_VERSION})")
        if not self.experiment_id:
            raise ConfigError("experiment_id", "must not be empty")
        if self.basis not in ("Z", "X"):
            raise ConfigError("basis", f"must be 'Z' or 'X', got {self.basis!r}")
        if self.origin not in SWEEP_ORIGINS:
            raise ConfigError("origin", f"must be one of {SWEEP_ORIGINS}")
        if self.epsilon < 0:
            raise ConfigError("epsilon", "must be non-negative")
        if any(e < 0 for e in self.epsilons):
            raise ConfigError("epsilons", "cutoffs must be non-negative")
        if self.workers is not None and self.workers < 1:
            raise ConfigError("workers", "must be at least 1")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots", "must be at least 1")
        if self.budget is not None and self.budget < 1:
            raise ConfigError("budget", "must be at least 1")
        if self.max_trajectory_errors < 0:
            raise ConfigError("max_trajectory_errors", "must be non-negative")
        if self.p_meas is not None and not 0 <= self.p_meas <= 1:
            raise ConfigError("p_meas", "must lie in [0, 1]")

        for i, d in enumerate(self.distances):
            if d < 3 or d % 2 == 0:
                raise ConfigError(f"distances[{i}]", f"distance must be odd and at least 3, got {d}")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid", "must be strictly increasing")
        if any(not 0 < p <= 1 for p in self.grid):
            raise ConfigError("grid", "physical rates must lie in (0, 1]")

        if self.kind == ExperimentKind.ORACLE_SUITE:
            if self.oracle is None:
                self.oracle = OracleSpec()
            return

        if not self.distances:
            raise ConfigError("distances", "at least one distance is required")
        if not self.grid:
            raise ConfigError("grid", "at least one grid value is required")
        if self.channel is None:
            raise ConfigError("channel", "a channel block is required")

        if self.kind == ExperimentKind.IMPORTANCE_SAMPLING:
            if self.budget is None:
                raise ConfigError("budget", "importance_sampling needs a shot budget")
            if self.importance is None:
                raise ConfigError("importance", "importance_sampling needs an importance block")
            if self.channel.kind not in PAULI_KINDS:
                raise ConfigError("channel.kind", "fixed-k sampling needs a stochastic Pauli fault model")
        elif self.shots is None:
            raise ConfigError("shots", f"{self.kind.value} needs a shot count")

        if self.kind == ExperimentKind.TRUNCATION_SWEEP and not self.epsilons:
            raise ConfigError("epsilons", "truncation_sweep needs at least one cutoff")
        if self.kind == ExperimentKind.SCHEDULE_COMPARE and self.channel.mode == ChannelMode.QUASIPROBABILITY:
            raise ConfigError("channel.mode", "schedule_compare runs exact or pta channels")
        for mode in self.compare_modes:
            ChannelSpec(self.channel.kind, mode)

    @property
    def effective_workers(self) -> int:
        return self.workers or os.cpu_count() or 1

    @property
    def modes(self) -> List[ChannelMode]:
        """Channel modes to run side by side (the configured one first)"""
        modes = [self.channel.mode]
        modes += [m for m in self.compare_modes if m not in modes]
        return modes

    def point_spec(
        self,
        d: int,
        rate: float,
        mode: Optional[ChannelMode] = None,
        noise_model: Optional[MemoryMode] = None,
        epsilon: Optional[float] = None,
    ) -> PointSpec:
        return PointSpec(
            d=d,
            channel=self.channel.build(rate, mode),
            basis=self.basis,
            noise_model=noise_model or self.noise_model,
            p_meas=self.p_meas,
            epsilon=self.epsilon if epsilon is None else epsilon,
            postselect=self.postselect,
            origin=self.origin,
        )

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "schema_version": self.schema_version,
            "experiment_id": self.experiment_id,
            "kind": self.kind.value,
            "distances": list(self.distances),
            "grid": list(self.grid),
            "channel": self.channel.to_dict() if self.channel else None,
            "noise_model": self.noise_model.value,
            "basis": self.basis,
            "epsilon": self.epsilon,
            "shots": self.shots,
            "budget": self.budget,
            "seed": self.seed,
            "workers": self.workers,
            "output": self.output,
            "compare_modes": [m.value for m in self.compare_modes],
            "epsilons": list(self.epsilons),
            "importance": vars(self.importance).copy() if self.importance else None,
            "oracle": vars(self.oracle).copy() if self.oracle else None,
            "postselect": self.postselect,
            "p_meas": self.p_meas,
            "origin": self.origin,
            "max_trajectory_errors": self.max_trajectory_errors,
        }
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a mapping")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown field")
        for required in ("experiment_id", "kind"):
            if required not in data:
                raise ConfigError(required, "missing required field")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError("<root>", str(exc)) from None


def _build_block(block_cls, data: Dict[str, Any], path: str):
    unknown = sorted(set(data) - set(block_cls.__dataclass_fields__))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
    try:
        return block_cls(**data)
    except TypeError as exc:
        raise ConfigError(path, str(exc)) from None
