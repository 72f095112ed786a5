"""
Decoder - Detection events and minimum-weight matching for memory experiments

Edges come from propagating every single Pauli fault of one round through
the round's operations; each fault that fires one or two detectors of the
decoded sector becomes a unit-weight edge carrying its logical flip.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from pauli_algebra import PauliString, commutes, conjugate_gate
from surface_code import (
    MemoryMode,
    OpKind,
    Operation,
    RotatedSurfaceCode,
    SiteRole,
    SyndromeRecord,
    build_code,
    circuit_level_schedule,
    expand_operations,
    phenomenological_schedule,
)

logger = logging.getLogger("pfsr_sim")

EXACT_MATCHING_CAP = 14
UNREACHABLE = 10 ** 6
BOUNDARY = "boundary"

Node = Tuple[int, int]


@dataclass(frozen=True)
class DetectionEvents:
    """(round, stabilizer) nodes where consecutive measurements differ"""
    basis: str
    nodes: Tuple[Node, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self.nodes), columns=["round", "stabilizer"])

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)


@dataclass
class MatchingGraph:
    """
    Detector graph for one memory basis.

    ``distance`` and ``parity`` are indexed by node position with the
    boundary as the last index. Node-to-node paths avoid the boundary;
    boundary pairings are chosen by the matcher itself.
    """
    code: RotatedSurfaceCode
    rounds: int
    basis: str
    nodes: List[Node]
    index: Dict[Node, int]
    graph: nx.Graph
    distance: np.ndarray
    parity: np.ndarray
    ambiguous_edges: int = 0

    @property
    def boundary(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Matching:
    pairs: Tuple[Tuple[Node, Optional[Node]], ...]
    cost: int
    parity: int


@dataclass(frozen=True)
class FaultMechanism:
    """Detectors (round offset 0 or 1, stabilizer) fired by one fault, and its logical flip"""
    events: Tuple[Node, ...]
    logical_flip: int


@lru_cache(maxsize=16)
def _code(d: int) -> RotatedSurfaceCode:
    return build_code(d)


def extract_events(record: SyndromeRecord, basis: Optional[str] = None) -> DetectionEvents:
    """XOR consecutive rounds of the stabilizers that detect errors against the measured logical"""
    basis = basis or record.basis
    code = _code(record.d)
    expected = (record.d + 1, code.num_stabilizers)
    if record.syndrome.shape != expected:
        raise ValueError(f"Syndrome shape {record.syndrome.shape}, expected {expected}")
    columns = [s.index for s in code.of_kind(basis)]
    flips = record.detection_matrix(columns)
    rows, cols = np.nonzero(flips)
    nodes = sorted((int(r), columns[c]) for r, c in zip(rows, cols))
    return DetectionEvents(basis, tuple(nodes))


def round_operations(code: RotatedSurfaceCode, mode: MemoryMode, origin: str = "top_left") -> List[Operation]:
    if mode == MemoryMode.PHENOMENOLOGICAL:
        steps = phenomenological_schedule(code, origin)
    else:
        steps = circuit_level_schedule(code, layered=mode == MemoryMode.CIRCUIT_LAYERED, origin=origin)
    return expand_operations(code, steps)


def _site_faults(role: SiteRole) -> Tuple[str, ...]:
    if role == SiteRole.MEASUREMENT:
        return ("FLIP",)
    if role == SiteRole.RESET:
        return ("X",)
    return ("X", "Y", "Z")


def fault_mechanisms(
    code: RotatedSurfaceCode, operations: Sequence[Operation], basis: str
) -> List[FaultMechanism]:
    """Propagate each single fault of one round to the detectors of ``basis``"""
    n = code.num_physical if any(op.kind == OpKind.MEASURE_ANCILLA for op in operations) else code.num_data
    stabilizer_ops = code.stabilizer_paulis(n)
    logical = code.logical(basis, n)
    relevant = {s.index for s in code.of_kind(basis)}
    data_mask = (1 << code.num_data) - 1
    mechanisms = []

    for j, op in enumerate(operations):
        if op.site is None:
            continue
        for fault in _site_faults(op.site.role):
            flipped: Set[int] = set()
            error = PauliString.identity(n)
            if fault == "FLIP":
                flipped = {op.stabilizer}
            else:
                error = PauliString.single(n, op.site.qubit, fault)
                for later in operations[j + 1:]:
                    if later.kind == OpKind.GATE:
                        error = conjugate_gate(error, later.name, later.qubits)
                    elif later.kind == OpKind.RESET:
                        error = error.without_qubit(later.qubits[0])
                    elif later.kind == OpKind.MEASURE_ANCILLA:
                        if error.letter(later.qubits[0]) in "XY":
                            flipped ^= {later.stabilizer}
                    elif later.kind == OpKind.MEASURE_STABILIZER:
                        if commutes(error, stabilizer_ops[later.stabilizer]):
                            flipped ^= {later.stabilizer}
            residual = PauliString(n, error.z_bits & data_mask, error.x_bits & data_mask, 0)
            persistent = {i for i, s in enumerate(stabilizer_ops) if commutes(residual, s)}
            events = [(0, s) for s in sorted(flipped & relevant)]
            events += [(1, s) for s in sorted((persistent ^ flipped) & relevant)]
            mechanisms.append(FaultMechanism(tuple(events), commutes(residual, logical)))
    return mechanisms


def build_matching_graph(
    code: RotatedSurfaceCode,
    rounds: int,
    basis: str,
    mode: MemoryMode = MemoryMode.PHENOMENOLOGICAL,
    origin: str = "top_left",
) -> MatchingGraph:
    """
    Unit-weight detector graph over ``rounds`` measurement rounds; faults
    occur in every round but the last (the perfect one).
    """
    checks = code.of_kind(basis)
    nodes = [(r, s.index) for r in range(rounds) for s in checks]
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_node(BOUNDARY)

    mechanisms = fault_mechanisms(code, round_operations(code, mode, origin), basis)
    ambiguous = set()
    for r in range(rounds - 1):
        for mechanism in mechanisms:
            shifted = [(r + dr, s) for dr, s in mechanism.events]
            if len(shifted) == 2:
                u, v = shifted
            elif len(shifted) == 1:
                u, v = shifted[0], BOUNDARY
            else:
                if not shifted and mechanism.logical_flip:
                    logger.warning("Undetectable single fault flips the logical")
                continue
            if not graph.has_edge(u, v):
                graph.add_edge(u, v, parity=mechanism.logical_flip)
            elif graph.edges[u, v]["parity"] != mechanism.logical_flip:
                ambiguous.add(frozenset((u, v)))
    if ambiguous:
        logger.warning(
            "%d edges join faults with opposite logical flips (d=%d, %s); the first fault fixes the parity",
            len(ambiguous), code.d, mode.value,
        )

    index = {node: i for i, node in enumerate(nodes)}
    size = len(nodes) + 1
    distance = np.full((size, size), UNREACHABLE, dtype=int)
    parity = np.zeros((size, size), dtype=np.uint8)
    inner = graph.subgraph(nodes)
    for i, source in enumerate(nodes):
        paths = nx.single_source_shortest_path(inner, source)
        for j in range(i, len(nodes)):
            path = paths.get(nodes[j])
            if path is None:
                continue
            distance[i, j] = distance[j, i] = len(path) - 1
            parity[i, j] = parity[j, i] = _path_parity(graph, path)
    to_boundary = nx.single_source_shortest_path(graph, BOUNDARY)
    boundary = len(nodes)
    distance[boundary, boundary] = 0
    for i, node in enumerate(nodes):
        path = to_boundary.get(node)
        if path is None:
            continue
        distance[i, boundary] = distance[boundary, i] = len(path) - 1
        parity[i, boundary] = parity[boundary, i] = _path_parity(graph, path)
    return MatchingGraph(code, rounds, basis, nodes, index, graph, distance, parity, len(ambiguous))


def _path_parity(graph: nx.Graph, path: Sequence) -> int:
    bit = 0
    for a, b in zip(path, path[1:]):
        bit ^= graph.edges[a, b]["parity"]
    return bit


@lru_cache(maxsize=16)
def matching_graph(
    d: int, rounds: int, basis: str, mode: MemoryMode = MemoryMode.PHENOMENOLOGICAL, origin: str = "top_left"
) -> MatchingGraph:
    return build_matching_graph(_code(d), rounds, basis, mode, origin)


def _exact_matching(positions: Sequence[int], graph: MatchingGraph) -> List[Tuple[int, Optional[int]]]:
    """Subset DP; the lowest unmatched event pairs first, partners ascending, boundary last"""
    dist = graph.distance
    boundary = graph.boundary
    count = len(positions)

    @lru_cache(maxsize=None)
    def best(mask: int) -> Tuple[int, Tuple]:
        if mask == 0:
            return 0, ()
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        choice = None
        for j in range(i + 1, count):
            if not rest >> j & 1:
                continue
            cost, pairs = best(rest & ~(1 << j))
            cost += int(dist[positions[i], positions[j]])
            if choice is None or cost < choice[0]:
                choice = (cost, ((i, j),) + pairs)
        cost, pairs = best(rest)
        cost += int(dist[positions[i], boundary])
        if choice is None or cost < choice[0]:
            choice = (cost, ((i, None),) + pairs)
        return choice

    return list(best((1 << count) - 1)[1])


def _greedy_matching(positions: Sequence[int], graph: MatchingGraph) -> List[Tuple[int, Optional[int]]]:
    """Repeatedly take the closest remaining pair or event-boundary link"""
    dist = graph.distance
    boundary = graph.boundary
    remaining = list(range(len(positions)))
    pairs = []
    while remaining:
        best = None
        for a_pos, a in enumerate(remaining):
            for b in remaining[a_pos + 1:]:
                candidate = (dist[positions[a], positions[b]], 0, a, b)
                if best is None or candidate < best:
                    best = candidate
            candidate = (dist[positions[a], boundary], 1, a, -1)
            if best is None or candidate < best:
                best = candidate
        _, _, a, b = best
        remaining.remove(a)
        if b >= 0:
            remaining.remove(b)
            pairs.append((a, b))
        else:
            pairs.append((a, None))
    return pairs


def match(events: DetectionEvents, graph: MatchingGraph, cap: int = EXACT_MATCHING_CAP) -> Matching:
    positions = [graph.index[node] for node in events.nodes]
    if not positions:
        return Matching((), 0, 0)
    if len(positions) <= cap:
        chosen = _exact_matching(positions, graph)
    else:
        logger.debug("%d events above the exact cap %d; greedy matching", len(positions), cap)
        chosen = _greedy_matching(positions, graph)
    cost = 0
    parity = 0
    pairs = []
    for i, j in chosen:
        target = graph.boundary if j is None else positions[j]
        cost += int(graph.distance[positions[i], target])
        parity ^= int(graph.parity[positions[i], target])
        pairs.append((events.nodes[i], None if j is None else events.nodes[j]))
    return Matching(tuple(pairs), cost, parity)


def decode(events: DetectionEvents, graph: MatchingGraph, cap: int = EXACT_MATCHING_CAP) -> int:
    """Logical-crossing parity of the minimum-weight matching"""
    return match(events, graph, cap).parity


def logical_failure(record: SyndromeRecord, correction_parity: int, basis: Optional[str] = None) -> int:
    """
    1 when the corrected logical readout disagrees with the prepared +1
    eigenstate. The correction must come from the sector of the measured
    logical: a Z-basis record is corrected with Z-check matching.
    """
    basis = basis or record.basis
    if basis != record.basis:
        raise ValueError(f"{basis}-sector correction applied to a {record.basis}-basis readout")
    return int(record.logical_bit) ^ int(correction_parity)


def decode_record(record: SyndromeRecord) -> int:
    """Events → matching → failure bit for a full memory record"""
    events = extract_events(record)
    graph = matching_graph(record.d, record.d + 1, record.basis, MemoryMode(record.noise_model), record.origin)
    return logical_failure(record, decode(events, graph), record.basis)
