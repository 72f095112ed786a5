"""
Tests for the sparse stabilizer-frame state
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dense_oracle import DenseState, OracleLimitError, overlap_fidelity
from pauli_algebra import CliffordTableau, DimensionError, PauliString
from pfsr_state import (
    ImpossiblePostselectionError,
    IncompatibleFrameError,
    NormError,
    PFSRState,
    label_to_string,
    string_to_label,
)

P = PauliString.from_literal
C8, S8 = np.cos(np.pi / 8), np.sin(np.pi / 8)


def bell_state() -> PFSRState:
    return PFSRState.init_zero(2).apply_gate("H", [0]).apply_gate("CX", [0, 1])


def entries_by_string(state: PFSRState):
    state.flush_relabel()
    return {label_to_string(label, state.n): entry for label, entry in state.entries.items()}


def test_init_zero():
    """Frame {Z_i}, one entry with identity history"""
    state = PFSRState.init_zero(2)
    assert state.frame == [P("ZI"), P("IZ")]
    assert state.entries == {0: (1.0 + 0j, P("II"))}
    with pytest.raises(DimensionError):
        PFSRState.init_zero(0)


def test_label_strings():
    """Bit string prints s_0 first"""
    assert label_to_string(1, 2) == "10"
    assert string_to_label("01") == 2


def test_bell_frame():
    """H then CNOT rotates the frame to {XX, ZZ}; the label stays 00"""
    state = bell_state()
    assert state.frame == [P("XX"), P("ZZ")]
    assert entries_by_string(state) == {"00": (1.0 + 0j, P("II"))}
    assert state.check_invariants() == []
    expected = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert overlap_fidelity(state.to_dense(), expected) == pytest.approx(1.0, abs=1e-12)


def test_pauli_permutes_labels():
    """ZI anticommutes with XX only: 00 → 10"""
    state = bell_state().apply_pauli(P("ZI"))
    entries = entries_by_string(state)
    assert list(entries) == ["10"]
    assert entries["10"][1] == P("ZI")


def test_t_gate_on_bell_pair():
    """T₀ splits the Bell entry into cos π/8 and -i sin π/8"""
    state = bell_state().apply_t(0)
    entries = entries_by_string(state)
    assert set(entries) == {"00", "10"}
    assert entries["00"][0] == pytest.approx(C8)
    assert entries["00"][1] == P("II")
    assert entries["10"][0] == pytest.approx(-1j * S8)
    assert entries["10"][1] == P("ZI")
    assert state.expectation_pauli(P("ZI")) == pytest.approx(0.0, abs=1e-12)
    assert state.global_log["max_entries"] == 2


def test_forced_measurement_recombines():
    """Forcing ZI = -1 on T₀|Bell⟩ leaves one entry e^{iπ/8} with history XX"""
    state = bell_state().apply_t(0)
    outcome, same = state.measure_pauli(P("ZI"), forced=-1)
    assert same is state
    assert outcome.eigenvalue == -1
    assert outcome.probability == pytest.approx(0.5)
    assert not outcome.commuting
    assert state.frame == [P("ZI"), P("ZZ")]
    entries = entries_by_string(state)
    assert list(entries) == ["10"]
    amplitude, history = entries["10"]
    assert amplitude == pytest.approx(np.exp(1j * np.pi / 8))
    assert history == P("XX")
    assert state.check_invariants() == []


def test_measurement_matches_dense_projection():
    """Post-measurement vectors agree with dense projection"""
    state = bell_state().apply_t(0)
    dense = DenseState(2).apply_gate("H", [0]).apply_gate("CX", [0, 1]).apply_gate("T", [0])
    state.measure_pauli(P("XI"), forced=1)
    probability = dense.project(P("XI"), 1)
    assert probability > 0
    assert overlap_fidelity(state.to_dense(), dense.vector) == pytest.approx(1.0, abs=1e-10)


def test_commuting_measurement_is_deterministic():
    """Measuring a frame element leaves the state alone; the opposite outcome is impossible"""
    state = bell_state()
    outcome, _ = state.measure_pauli(P("ZZ"), rng=np.random.default_rng(0))
    assert outcome.eigenvalue == 1
    assert outcome.commuting
    assert outcome.probability == pytest.approx(1.0)
    with pytest.raises(ImpossiblePostselectionError):
        bell_state().measure_pauli(P("ZZ"), forced=-1)
    outcome, _ = bell_state().measure_pauli(P("-ZZ"), forced=-1)
    assert outcome.eigenvalue == -1


def test_measure_rejects_bad_arguments():
    """Non-Hermitian observables and missing rng raise"""
    with pytest.raises(ValueError):
        bell_state().measure_pauli(P("+iZZ"), forced=1)
    with pytest.raises(ValueError):
        bell_state().measure_pauli(P("ZI"))
    with pytest.raises(DimensionError):
        bell_state().measure_pauli(P("Z"), forced=1)


def test_pauli_sum_norm_guard():
    """A norm-changing sum needs renormalize=True"""
    terms = [(1.0, P("II")), (1.0, P("ZI"))]
    with pytest.raises(NormError):
        bell_state().apply_pauli_sum(terms)
    state = bell_state().apply_pauli_sum(terms, renormalize=True)
    assert state.norm_squared() == pytest.approx(1.0)
    with pytest.raises(NormError):
        PFSRState.init_zero(1).apply_pauli_sum([(1.0, P("I")), (-1.0, P("Z"))], renormalize=True)


def test_truncation():
    """Small amplitudes are dropped; when nothing survives the largest entry is kept"""
    state = bell_state().apply_t(0).truncate(0.5)
    assert len(state) == 1
    assert state.norm_squared() == pytest.approx(1.0)

    untouched = bell_state().apply_t(0).truncate(0.0)
    assert len(untouched) == 2

    fallback = bell_state().apply_t(0).truncate(2.0)
    assert len(fallback) == 1
    assert abs(next(iter(fallback.entries.values()))[0]) == pytest.approx(1.0)
    assert fallback.global_log["truncation_fallbacks"] == 1


def test_dump_round_trip():
    """A dump parses back to the same state"""
    state = bell_state().apply_t(0)
    state.measure_pauli(P("XI"), forced=-1)
    text = state.dump()
    assert text.splitlines()[0].startswith("S:")
    again = PFSRState.from_dump(text)
    assert again.dump() == text
    assert again.inner_product(state) == pytest.approx(1.0)


def test_inner_product_needs_shared_frame():
    """Different frames cannot be compared entry by entry"""
    with pytest.raises(IncompatibleFrameError):
        bell_state().inner_product(PFSRState.init_zero(2))


def test_deferred_clifford_matches_eager_gates():
    """A pending tableau flushed later gives the eager result"""
    gates = [("H", [1]), ("CX", [1, 0]), ("S", [0])]
    eager = bell_state().apply_t(0)
    for name, qubits in gates:
        eager.apply_gate(name, qubits)
    lazy = bell_state().apply_t(0).apply_clifford(CliffordTableau.from_gates(2, gates))
    assert lazy.labels_stale
    assert lazy.dump() == eager.dump()
    assert lazy.check_invariants() == []


def test_reset_returns_to_zero():
    """Reset leaves ⟨Z⟩ = +1 whatever the outcome"""
    rng = np.random.default_rng(11)
    for _ in range(10):
        state = PFSRState.init_zero(2).apply_gate("H", [0]).apply_t(0)
        state.reset(0, rng)
        assert state.expectation_pauli(P("ZI")) == pytest.approx(1.0)


def test_random_circuits_match_dense():
    """Clifford+T circuits with forced measurements track the dense simulator"""
    rng = np.random.default_rng(12)
    letters = "XYZ"
    for _ in range(25):
        n = int(rng.integers(1, 5))
        state = PFSRState.init_zero(n)
        dense = DenseState(n)
        for _ in range(20):
            roll = rng.random()
            q = int(rng.integers(n))
            if roll < 0.2:
                state.apply_t(q)
                dense.apply_gate("T", [q])
            elif roll < 0.35 and n > 1:
                c, t = (int(v) for v in rng.choice(n, size=2, replace=False))
                state.apply_gate("CX", [c, t])
                dense.apply_gate("CX", [c, t])
            elif roll < 0.45:
                p = PauliString.single(n, q, letters[int(rng.integers(3))])
                outcome, _ = state.measure_pauli(p, rng=rng)
                dense.project(p, outcome.eigenvalue)
            else:
                name = ["H", "S", "SDG", "X", "Z"][int(rng.integers(5))]
                state.apply_gate(name, [q])
                dense.apply_gate(name, [q])
        assert state.check_invariants() == []
        assert overlap_fidelity(state.to_dense(), dense.vector) == pytest.approx(1.0, abs=1e-8)


def test_dense_reconstruction_respects_cap(monkeypatch):
    """to_dense refuses states above the configured qubit cap"""
    monkeypatch.setenv("PFSR_ORACLE_MAX_QUBITS", "2")
    with pytest.raises(OracleLimitError):
        PFSRState.init_zero(3).to_dense()
    assert abs(PFSRState.init_zero(2).to_dense()[0]) == pytest.approx(1.0)
