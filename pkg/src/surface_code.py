"""
Surface Code - Rotated surface code, extraction schedules and memory experiments
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from noise_channels import (
    ChannelKind,
    NoiseChannel,
    SignedSampleWeight,
    apply_channel,
    apply_pauli_channel,
    flip_record,
)
from pauli_algebra import PauliString, commutes
from pfsr_state import PFSRState

logger = logging.getLogger("pfsr_sim")

# Plaquette corners relative to the anchor (r, c): NW=(r,c), NE=(r,c+1), SW=(r+1,c), SE=(r+1,c+1)
CORNER_OFFSETS = {"NW": (0, 0), "NE": (0, 1), "SW": (1, 0), "SE": (1, 1)}
CNOT_ORDER = {"Z": ("NW", "NE", "SW", "SE"), "X": ("NW", "SW", "NE", "SE")}
SWEEP_ORIGINS = ("top_left", "bottom_right")


@dataclass(frozen=True)
class Stabilizer:
    """One check of the rotated code"""
    index: int
    kind: str
    support: Tuple[int, ...]
    corners: Tuple[Tuple[str, int], ...]
    anchor: Tuple[int, int]
    ancilla: int

    @property
    def weight(self) -> int:
        return len(self.support)

    def pauli(self, n: int) -> PauliString:
        return PauliString.from_support(n, self.support, self.kind)

    def cnot_sequence(self) -> List[Tuple[int, int]]:
        """(control, target) pairs in hook-safe corner order"""
        by_corner = dict(self.corners)
        pairs = []
        for corner in CNOT_ORDER[self.kind]:
            if corner not in by_corner:
                continue
            q = by_corner[corner]
            pairs.append((q, self.ancilla) if self.kind == "Z" else (self.ancilla, q))
        return pairs


@dataclass
class RotatedSurfaceCode:
    """Distance-d rotated surface code; data qubit (r, c) has index r·d + c"""
    d: int
    stabilizers: List[Stabilizer]
    logical_x: PauliString
    logical_z: PauliString

    @property
    def num_data(self) -> int:
        return self.d * self.d

    @property
    def num_stabilizers(self) -> int:
        return len(self.stabilizers)

    @property
    def num_physical(self) -> int:
        return self.num_data + self.num_stabilizers

    def data_index(self, row: int, col: int) -> int:
        return row * self.d + col

    def coordinates(self, qubit: int) -> Tuple[int, int]:
        return divmod(qubit, self.d)

    def of_kind(self, kind: str) -> List[Stabilizer]:
        return [s for s in self.stabilizers if s.kind == kind]

    def stabilizer_paulis(self, n: Optional[int] = None) -> List[PauliString]:
        n = n or self.num_data
        return [s.pauli(n) for s in self.stabilizers]

    def logical(self, basis: str, n: Optional[int] = None) -> PauliString:
        """Logical operator measured in ``basis`` ("Z" → Z_L, "X" → X_L), padded to n qubits"""
        n = n or self.num_data
        op = self.logical_z if basis == "Z" else self.logical_x
        return PauliString(n, op.z_bits, op.x_bits, op.phase_power)

    def check(self) -> List[str]:
        """Return violated code invariants"""
        problems = []
        paulis = self.stabilizer_paulis()
        if len(paulis) != self.num_data - 1:
            problems.append(f"{len(paulis)} stabilizers, expected {self.num_data - 1}")
        for i, a in enumerate(paulis):
            for b in paulis[i + 1:]:
                if commutes(a, b):
                    problems.append(f"{a} and {b} anticommute")
            for logical in (self.logical_x, self.logical_z):
                if commutes(a, logical):
                    problems.append(f"{logical} anticommutes with {a}")
        if not commutes(self.logical_x, self.logical_z):
            problems.append("logical X and Z commute")
        for s in self.stabilizers:
            expected = 4 if 0 <= s.anchor[0] < self.d - 1 and 0 <= s.anchor[1] < self.d - 1 else 2
            if s.weight != expected:
                problems.append(f"stabilizer {s.index} has weight {s.weight}")
        return problems


def _plaquette_anchors(d: int) -> List[Tuple[str, Tuple[int, int]]]:
    anchors = []
    for r in range(d - 1):
        for c in range(d - 1):
            anchors.append(("X" if (r + c) % 2 == 0 else "Z", (r, c)))
    for c in range(0, d - 1, 2):
        anchors.append(("Z", (-1, c)))
    for c in range(1, d - 1, 2):
        anchors.append(("Z", (d - 1, c)))
    for r in range(1, d - 1, 2):
        anchors.append(("X", (r, -1)))
    for r in range(0, d - 1, 2):
        anchors.append(("X", (r, d - 1)))
    return anchors


def _sweep_key(origin: str):
    if origin == "top_left":
        return lambda support: (max(support), min(support))
    if origin == "bottom_right":
        return lambda support: (-min(support), -max(support))
    raise ValueError(f"Unknown sweep origin {origin!r}; use one of {SWEEP_ORIGINS}")


def build_code(d: int) -> RotatedSurfaceCode:
    """
    Build the rotated code.

    Z-type boundaries are on the top and bottom edges, X-type on the left
    and right. Stabilizers are indexed in top-left sweep order.
    """
    if d < 3 or d % 2 == 0:
        raise ValueError(f"Distance must be odd and at least 3, got {d}")
    raw = []
    for kind, (r, c) in _plaquette_anchors(d):
        corners = []
        for corner, (dr, dc) in CORNER_OFFSETS.items():
            rr, cc = r + dr, c + dc
            if 0 <= rr < d and 0 <= cc < d:
                corners.append((corner, rr * d + cc))
        support = tuple(sorted(q for _, q in corners))
        raw.append((kind, support, tuple(corners), (r, c)))
    key = _sweep_key("top_left")
    raw.sort(key=lambda item: key(item[1]))
    stabilizers = [
        Stabilizer(index=i, kind=kind, support=support, corners=corners, anchor=anchor, ancilla=d * d + i)
        for i, (kind, support, corners, anchor) in enumerate(raw)
    ]
    n = d * d
    logical_x = PauliString.from_support(n, range(d), "X")
    logical_z = PauliString.from_support(n, [r * d for r in range(d)], "Z")
    return RotatedSurfaceCode(d, stabilizers, logical_x, logical_z)


# ----------------------------------------------------------------------
# Schedules
# ----------------------------------------------------------------------

class StepKind(Enum):
    NOISE_ON = "noise_on"
    MEASURE_STABILIZER = "measure_stabilizer"
    GATE_LAYER = "gate_layer"
    ANCILLA_CYCLE = "ancilla_cycle"


class MemoryMode(Enum):
    PHENOMENOLOGICAL = "phenomenological"
    CIRCUIT_LAYERED = "circuit_layered"
    CIRCUIT_PARALLEL = "circuit_parallel"

    @property
    def is_circuit_level(self) -> bool:
        return self != MemoryMode.PHENOMENOLOGICAL


@dataclass(frozen=True)
class ScheduleStep:
    """
    One schedule entry. GATE_LAYER gates use "R" (reset) and "M"
    (Z measurement of an ancilla) alongside the Clifford gate names.
    """
    kind: StepKind
    round: int = 0
    qubits: Tuple[int, ...] = ()
    stabilizer: Optional[int] = None
    gates: Tuple[Tuple[str, Tuple[int, ...]], ...] = ()

    def to_text(self) -> str:
        if self.kind == StepKind.NOISE_ON:
            return f"{self.round}\tNOISE_ON\t{','.join(map(str, self.qubits))}"
        if self.kind in (StepKind.MEASURE_STABILIZER, StepKind.ANCILLA_CYCLE):
            return f"{self.round}\t{self.kind.name}\t{self.stabilizer}"
        body = " ".join(f"{name}({','.join(map(str, qs))})" for name, qs in self.gates)
        return f"{self.round}\tGATE_LAYER\t{body}"


def dump_schedule(steps: Sequence[ScheduleStep]) -> str:
    return "\n".join(step.to_text() for step in steps)


def check_schedule(code: RotatedSurfaceCode, steps: Sequence[ScheduleStep]) -> List[str]:
    """
    Every data qubit noised once, every stabilizer measured once and only
    after its whole support was noised, no qubit twice in a gate layer.
    """
    problems = []
    noised: Dict[int, int] = {}
    measured: Dict[int, int] = {}
    by_ancilla = {s.ancilla: s for s in code.stabilizers}

    def measure(stab: Stabilizer):
        measured[stab.index] = measured.get(stab.index, 0) + 1
        missing = [q for q in stab.support if q not in noised]
        if missing:
            problems.append(f"stabilizer {stab.index} measured before qubits {missing} were noised")

    for i, step in enumerate(steps):
        if step.kind == StepKind.NOISE_ON:
            for q in step.qubits:
                noised[q] = noised.get(q, 0) + 1
        elif step.kind in (StepKind.MEASURE_STABILIZER, StepKind.ANCILLA_CYCLE):
            measure(code.stabilizers[step.stabilizer])
        else:
            used = [q for _, qubits in step.gates for q in qubits]
            if len(used) != len(set(used)):
                problems.append(f"step {i} uses a qubit twice")
            for name, qubits in step.gates:
                if name == "M":
                    measure(by_ancilla[qubits[0]])

    for q in range(code.num_data):
        if noised.get(q, 0) != 1:
            problems.append(f"data qubit {q} noised {noised.get(q, 0)} times")
    for s in code.stabilizers:
        if measured.get(s.index, 0) != 1:
            problems.append(f"stabilizer {s.index} measured {measured.get(s.index, 0)} times")
    return problems


def sweep_order(code: RotatedSurfaceCode, origin: str = "top_left") -> List[Stabilizer]:
    key = _sweep_key(origin)
    return sorted(code.stabilizers, key=lambda s: key(s.support))


def phenomenological_schedule(
    code: RotatedSurfaceCode, origin: str = "top_left", round_index: int = 0
) -> List[ScheduleStep]:
    """
    Greedy corner sweep: for each stabilizer, noise every support qubit not
    yet noised this round, then measure it immediately.
    """
    steps = []
    noised = set()
    for stab in sweep_order(code, origin):
        fresh = tuple(q for q in stab.support if q not in noised)
        if fresh:
            steps.append(ScheduleStep(StepKind.NOISE_ON, round_index, qubits=fresh))
            noised.update(fresh)
        steps.append(ScheduleStep(StepKind.MEASURE_STABILIZER, round_index, stabilizer=stab.index))
    return steps


def circuit_level_schedule(
    code: RotatedSurfaceCode, layered: bool = True, origin: str = "top_left", round_index: int = 0
) -> List[ScheduleStep]:
    """Layered per-ancilla cycles in sweep order, or the parallel four-step CNOT schedule"""
    if layered:
        steps = []
        noised = set()
        for stab in sweep_order(code, origin):
            fresh = tuple(q for q in stab.support if q not in noised)
            if fresh:
                steps.append(ScheduleStep(StepKind.NOISE_ON, round_index, qubits=fresh))
                noised.update(fresh)
            steps.append(ScheduleStep(StepKind.ANCILLA_CYCLE, round_index, stabilizer=stab.index))
        return steps

    ancillas = [s.ancilla for s in code.stabilizers]
    x_ancillas = [s.ancilla for s in code.of_kind("X")]
    layer = lambda gates: ScheduleStep(StepKind.GATE_LAYER, round_index, gates=tuple(gates))
    steps = [
        layer(("R", (a,)) for a in ancillas),
        ScheduleStep(StepKind.NOISE_ON, round_index, qubits=tuple(range(code.num_data))),
        layer(("H", (a,)) for a in x_ancillas),
    ]
    for t in range(4):
        gates = []
        for stab in code.stabilizers:
            corner = CNOT_ORDER[stab.kind][t]
            q = dict(stab.corners).get(corner)
            if q is None:
                continue
            gates.append(("CX", (q, stab.ancilla) if stab.kind == "Z" else (stab.ancilla, q)))
        steps.append(layer(gates))
    steps.append(layer(("H", (a,)) for a in x_ancillas))
    steps.append(layer(("M", (a,)) for a in ancillas))
    return steps


# ----------------------------------------------------------------------
# Operation walk with noise sites
# ----------------------------------------------------------------------

class SiteRole(Enum):
    IDLE = "idle"
    GATE = "gate"
    RESET = "reset"
    PRE_MEASURE = "pre_measure"
    MEASUREMENT = "measurement"


class OpKind(Enum):
    NOISE = "noise"
    GATE = "gate"
    RESET = "reset"
    MEASURE_ANCILLA = "measure_ancilla"
    MEASURE_STABILIZER = "measure_stabilizer"
    RECORD_FLIP = "record_flip"


@dataclass(frozen=True)
class NoiseSite:
    """A potentially faulty location inside one round"""
    position: int
    role: SiteRole
    qubit: Optional[int] = None
    stabilizer: Optional[int] = None

    @property
    def fault_kind(self) -> ChannelKind:
        if self.role == SiteRole.RESET:
            return ChannelKind.BIT_FLIP
        if self.role == SiteRole.MEASUREMENT:
            return ChannelKind.MEASUREMENT_FLIP
        return ChannelKind.DEPOLARIZING


@dataclass(frozen=True)
class Operation:
    kind: OpKind
    qubits: Tuple[int, ...] = ()
    name: str = ""
    stabilizer: Optional[int] = None
    site: Optional[NoiseSite] = None


class _Walker:
    def __init__(self, code: RotatedSurfaceCode):
        self.code = code
        self.ops: List[Operation] = []
        self.sites = 0
        self.ancilla_to_stabilizer = {s.ancilla: s.index for s in code.stabilizers}

    def site(self, role: SiteRole, qubit: Optional[int] = None, stabilizer: Optional[int] = None):
        noise_site = NoiseSite(self.sites, role, qubit, stabilizer)
        self.sites += 1
        kind = OpKind.RECORD_FLIP if role == SiteRole.MEASUREMENT else OpKind.NOISE
        self.ops.append(Operation(kind, () if qubit is None else (qubit,), stabilizer=stabilizer, site=noise_site))

    def gate(self, name: str, qubits: Tuple[int, ...]):
        if name == "R":
            self.ops.append(Operation(OpKind.RESET, qubits))
            self.site(SiteRole.RESET, qubits[0])
        elif name == "M":
            stabilizer = self.ancilla_to_stabilizer[qubits[0]]
            self.site(SiteRole.PRE_MEASURE, qubits[0])
            self.ops.append(Operation(OpKind.MEASURE_ANCILLA, qubits, stabilizer=stabilizer))
            self.site(SiteRole.MEASUREMENT, stabilizer=stabilizer)
        else:
            self.ops.append(Operation(OpKind.GATE, qubits, name=name))
            for q in qubits:
                self.site(SiteRole.GATE, q)

    def step(self, step: ScheduleStep):
        if step.kind == StepKind.NOISE_ON:
            for q in step.qubits:
                self.site(SiteRole.IDLE, q)
        elif step.kind == StepKind.MEASURE_STABILIZER:
            self.ops.append(Operation(OpKind.MEASURE_STABILIZER, stabilizer=step.stabilizer))
            self.site(SiteRole.MEASUREMENT, stabilizer=step.stabilizer)
        elif step.kind == StepKind.ANCILLA_CYCLE:
            stab = self.code.stabilizers[step.stabilizer]
            a = stab.ancilla
            self.gate("R", (a,))
            if stab.kind == "X":
                self.gate("H", (a,))
            for pair in stab.cnot_sequence():
                self.gate("CX", pair)
            if stab.kind == "X":
                self.gate("H", (a,))
            self.gate("M", (a,))
        else:
            for name, qubits in step.gates:
                self.gate(name, tuple(qubits))


def expand_operations(code: RotatedSurfaceCode, steps: Sequence[ScheduleStep]) -> List[Operation]:
    """Flatten a schedule into elementary operations with interleaved noise sites"""
    walker = _Walker(code)
    for step in steps:
        walker.step(step)
    return walker.ops


def enumerate_noise_sites(code: RotatedSurfaceCode, steps: Sequence[ScheduleStep]) -> List[NoiseSite]:
    return [op.site for op in expand_operations(code, steps) if op.site is not None]


# ----------------------------------------------------------------------
# Noise hooks
# ----------------------------------------------------------------------

class NoiseHook:
    """Called at every noise site of a memory experiment; the base class is noiseless"""

    def __init__(self):
        self.begin()

    def begin(self):
        self.weight = SignedSampleWeight()

    def on_site(self, state: PFSRState, site: NoiseSite, location: int, rng: np.random.Generator):
        pass

    def on_record(self, bit: int, site: NoiseSite, location: int, rng: np.random.Generator) -> int:
        return bit


class ChannelNoise(NoiseHook):
    """
    Physical channel at every qubit site, bit flips after resets and
    classical flips on every recorded outcome.
    """

    def __init__(self, channel: NoiseChannel, p_meas: Optional[float] = None, epsilon: float = 0.0):
        self.channel = channel
        self.p_meas = channel.measurement_flip_probability if p_meas is None else p_meas
        self.epsilon = epsilon
        super().__init__()

    def on_site(self, state, site, location, rng):
        if site.role == SiteRole.RESET:
            apply_pauli_channel(state, site.qubit, (self.channel.physical_rate, 0.0, 0.0), rng)
            return
        _, weight = apply_channel(state, site.qubit, self.channel, rng, self.weight)
        self.weight = weight or self.weight
        if self.epsilon > 0 and not self.channel.is_pauli:
            state.truncate(self.epsilon)

    def on_record(self, bit, site, location, rng):
        return flip_record(bit, self.p_meas, rng)


class FaultInjection(NoiseHook):
    """Deterministic faults at chosen global locations: a Pauli letter or "FLIP" for records"""

    def __init__(self, faults: Dict[int, str]):
        self.faults = dict(faults)
        super().__init__()

    def on_site(self, state, site, location, rng):
        letter = self.faults.get(location)
        if letter is not None:
            state.apply_pauli(PauliString.single(state.n, site.qubit, letter))

    def on_record(self, bit, site, location, rng):
        return bit ^ 1 if location in self.faults else bit


# ----------------------------------------------------------------------
# Records
# ----------------------------------------------------------------------

@dataclass
class SyndromeRecord:
    """(d+1) × (d²-1) measured bits (1 means -1) plus the logical readout"""
    d: int
    basis: str
    syndrome: np.ndarray
    logical_bit: int
    discarded: bool = False
    weight: float = 1.0
    max_entries: int = 1
    truncation_fallbacks: int = 0
    entry_profile: Optional[List[int]] = None
    noise_model: str = MemoryMode.PHENOMENOLOGICAL.value
    origin: str = "top_left"

    def detection_matrix(self, columns: Sequence[int]) -> np.ndarray:
        """Round-to-round changes of the selected stabilizers, first round against +1"""
        block = self.syndrome[:, list(columns)].astype(np.uint8)
        previous = np.vstack([np.zeros((1, block.shape[1]), dtype=np.uint8), block[:-1]])
        return block ^ previous

    def to_frame(self) -> pd.DataFrame:
        rounds, stabs = np.indices(self.syndrome.shape)
        return pd.DataFrame({
            "round": rounds.ravel(),
            "stabilizer": stabs.ravel(),
            "bit": self.syndrome.ravel().astype(int),
        })

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    def save_npz(self, path) -> None:
        np.savez_compressed(
            path,
            packed=np.packbits(self.syndrome.ravel()),
            shape=np.array(self.syndrome.shape),
            meta=np.array([self.d, self.logical_bit, int(self.discarded), self.max_entries]),
            basis=np.array(self.basis),
            noise_model=np.array(self.noise_model),
            origin=np.array(self.origin),
        )

    @classmethod
    def load_npz(cls, path) -> "SyndromeRecord":
        with np.load(Path(path)) as data:
            shape = tuple(int(v) for v in data["shape"])
            bits = np.unpackbits(data["packed"])[: shape[0] * shape[1]].reshape(shape)
            d, logical_bit, discarded, max_entries = (int(v) for v in data["meta"])
            return cls(
                d, str(data["basis"]), bits, logical_bit, bool(discarded), max_entries=max_entries,
                noise_model=str(data["noise_model"]), origin=str(data["origin"]),
            )


# ----------------------------------------------------------------------
# Memory experiment
# ----------------------------------------------------------------------

class MemoryExperiment:
    """
    d noisy rounds plus one perfect round on a prepared logical state.

    The encoded state is prepared once (init, optional transversal H,
    forced +1 projection of every stabilizer) and copied per trajectory.
    """

    def __init__(
        self,
        d: int,
        basis: str = "Z",
        mode: MemoryMode = MemoryMode.PHENOMENOLOGICAL,
        origin: str = "top_left",
    ):
        if basis not in ("Z", "X"):
            raise ValueError(f"Basis must be 'Z' or 'X', got {basis!r}")
        self.code = build_code(d)
        self.d = d
        self.basis = basis
        self.mode = mode
        self.origin = origin
        self.n = self.code.num_physical if mode.is_circuit_level else self.code.num_data
        if mode == MemoryMode.PHENOMENOLOGICAL:
            self.steps = phenomenological_schedule(self.code, origin)
        else:
            self.steps = circuit_level_schedule(self.code, layered=mode == MemoryMode.CIRCUIT_LAYERED, origin=origin)
        self.operations = expand_operations(self.code, self.steps)
        self.sites = [op.site for op in self.operations if op.site is not None]
        self.stabilizer_ops = self.code.stabilizer_paulis(self.n)
        self.logical_op = self.code.logical(basis, self.n)
        self.relevant = [s.index for s in self.code.of_kind(basis)]
        self._prepared: Optional[PFSRState] = None

    @property
    def sites_per_round(self) -> int:
        return len(self.sites)

    @property
    def num_locations(self) -> int:
        return self.d * self.sites_per_round

    def prepared_state(self) -> PFSRState:
        if self._prepared is None:
            state = PFSRState.init_zero(self.n)
            if self.basis == "X":
                for q in range(self.code.num_data):
                    state.apply_gate("H", [q])
            for op in self.stabilizer_ops:
                state.measure_pauli(op, forced=1)
            state.global_log["max_entries"] = len(state)
            self._prepared = state
        return self._prepared.copy()

    def run(
        self,
        rng: np.random.Generator,
        noise: Optional[NoiseHook] = None,
        postselect: bool = False,
        track_profile: bool = False,
    ) -> SyndromeRecord:
        noise = noise or NoiseHook()
        noise.begin()
        state = self.prepared_state()
        syndrome = np.zeros((self.d + 1, self.code.num_stabilizers), dtype=np.uint8)
        profile: Optional[List[int]] = [] if track_profile else None

        for round_index in range(self.d):
            self._run_round(state, round_index, syndrome[round_index], noise, rng, profile)

        for op_index, op in enumerate(self.stabilizer_ops):
            outcome, _ = state.measure_pauli(op, rng=rng)
            syndrome[self.d, op_index] = outcome.bit
        logical, _ = state.measure_pauli(self.logical_op, rng=rng)

        record = SyndromeRecord(
            d=self.d,
            basis=self.basis,
            syndrome=syndrome,
            logical_bit=logical.bit,
            weight=noise.weight.value,
            max_entries=state.global_log.get("max_entries", 1),
            truncation_fallbacks=state.global_log.get("truncation_fallbacks", 0),
            entry_profile=profile,
            noise_model=self.mode.value,
            origin=self.origin,
        )
        if postselect:
            record.discarded = bool(record.detection_matrix(self.relevant).any())
        return record

    def _run_round(self, state, round_index, row, noise, rng, profile):
        offset = round_index * self.sites_per_round
        for op in self.operations:
            if op.kind == OpKind.NOISE:
                noise.on_site(state, op.site, offset + op.site.position, rng)
            elif op.kind == OpKind.GATE:
                state.apply_gate(op.name, op.qubits)
            elif op.kind == OpKind.RESET:
                state.reset(op.qubits[0], rng)
            elif op.kind == OpKind.MEASURE_ANCILLA:
                outcome, _ = state.measure_pauli(PauliString.single(self.n, op.qubits[0], "Z"), rng=rng)
                row[op.stabilizer] = outcome.bit
            elif op.kind == OpKind.MEASURE_STABILIZER:
                outcome, _ = state.measure_pauli(self.stabilizer_ops[op.stabilizer], rng=rng)
                row[op.stabilizer] = outcome.bit
            elif op.kind == OpKind.RECORD_FLIP:
                row[op.stabilizer] = noise.on_record(int(row[op.stabilizer]), op.site, offset + op.site.position, rng)
            if profile is not None and op.kind != OpKind.GATE:
                profile.append(len(state))


@lru_cache(maxsize=32)
def memory_experiment(d: int, basis: str = "Z", mode: MemoryMode = MemoryMode.PHENOMENOLOGICAL, origin: str = "top_left") -> MemoryExperiment:
    """Shared experiment per (d, basis, mode, origin); each worker process builds its own"""
    return MemoryExperiment(d, basis, mode, origin)


def run_memory_experiment(
    d: int,
    basis: str,
    channel: Optional[NoiseChannel],
    mode: MemoryMode,
    epsilon: float,
    rng: np.random.Generator,
    p_meas: Optional[float] = None,
    postselect: bool = False,
) -> SyndromeRecord:
    experiment = memory_experiment(d, basis, mode)
    noise = ChannelNoise(channel, p_meas, epsilon) if channel is not None else None
    return experiment.run(rng, noise, postselect=postselect)


def run_phenomenological_round(
    state: PFSRState,
    code: RotatedSurfaceCode,
    channel: Optional[NoiseChannel],
    p_meas: float,
    rng: np.random.Generator,
    origin: str = "top_left",
) -> Tuple[PFSRState, np.ndarray]:
    """Execute one sweep on a data-qubit state and return the flipped syndrome row"""
    noise = ChannelNoise(channel, p_meas) if channel is not None else NoiseHook()
    stabilizer_ops = code.stabilizer_paulis(state.n)
    row = np.zeros(code.num_stabilizers, dtype=np.uint8)
    for op in expand_operations(code, phenomenological_schedule(code, origin)):
        if op.kind == OpKind.NOISE:
            noise.on_site(state, op.site, op.site.position, rng)
        elif op.kind == OpKind.MEASURE_STABILIZER:
            outcome, _ = state.measure_pauli(stabilizer_ops[op.stabilizer], rng=rng)
            row[op.stabilizer] = outcome.bit
        elif op.kind == OpKind.RECORD_FLIP:
            row[op.stabilizer] = flip_record(int(row[op.stabilizer]), p_meas, rng)
    return state, row
