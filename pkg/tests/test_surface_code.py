"""
Tests for the rotated surface code, its schedules and memory experiments
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from noise_channels import ChannelKind, NoiseChannel
from pauli_algebra import commutes
from surface_code import (
    ChannelNoise,
    MemoryExperiment,
    MemoryMode,
    ScheduleStep,
    SiteRole,
    StepKind,
    SyndromeRecord,
    build_code,
    check_schedule,
    circuit_level_schedule,
    dump_schedule,
    enumerate_noise_sites,
    expand_operations,
    memory_experiment,
    phenomenological_schedule,
    run_memory_experiment,
    run_phenomenological_round,
    sweep_order,
)
from pfsr_state import PFSRState


@pytest.mark.parametrize("d", [3, 5, 7])
def test_code_sizes_and_invariants(d):
    """d² data qubits, d²-1 commuting stabilizers, anticommuting logicals"""
    code = build_code(d)
    assert code.num_data == d * d
    assert code.num_stabilizers == d * d - 1
    assert len(code.of_kind("X")) == len(code.of_kind("Z")) == (d * d - 1) // 2
    assert code.check() == []
    weights = sorted(s.weight for s in code.stabilizers)
    assert weights.count(2) == 2 * (d - 1)
    assert weights.count(4) == (d - 1) ** 2


def test_d5_counts():
    """The d=5 code has 25 data qubits and 24 stabilizers"""
    code = build_code(5)
    assert (code.num_data, code.num_stabilizers) == (25, 24)


@pytest.mark.parametrize("d", [1, 2, 4])
def test_bad_distance(d):
    """Even or too small distances are rejected"""
    with pytest.raises(ValueError):
        build_code(d)


def test_logical_operators():
    """Z_L runs down column 0, X_L along row 0"""
    code = build_code(3)
    assert code.logical_z.to_literal() == "ZIIZIIZII"
    assert code.logical_x.to_literal() == "XXXIIIIII"
    assert commutes(code.logical_x, code.logical_z) == 1


def test_hook_safe_cnot_order():
    """X checks go NW, SW, NE, SE; Z checks go NW, NE, SW, SE"""
    code = build_code(5)
    for stab in code.stabilizers:
        if stab.weight != 4:
            continue
        corners = dict(stab.corners)
        order = ("NW", "SW", "NE", "SE") if stab.kind == "X" else ("NW", "NE", "SW", "SE")
        data = [pair[1] if stab.kind == "X" else pair[0] for pair in stab.cnot_sequence()]
        assert data == [corners[c] for c in order]
        for control, target in stab.cnot_sequence():
            assert (target if stab.kind == "X" else control) != stab.ancilla


def test_sweep_origins():
    """Both corner sweeps visit every stabilizer once, in different orders"""
    code = build_code(5)
    forward = [s.index for s in sweep_order(code, "top_left")]
    backward = [s.index for s in sweep_order(code, "bottom_right")]
    assert sorted(forward) == sorted(backward) == list(range(24))
    assert forward != backward
    with pytest.raises(ValueError):
        sweep_order(code, "middle")


@pytest.mark.slow
def test_sweep_origin_does_not_change_detection_statistics():
    """Opposite corner sweeps give the same detection-event marginals under amplitude damping"""
    noise_channel = NoiseChannel(ChannelKind.AMPLITUDE_DAMPING, 0.08)
    shots = 4000
    counts = []
    for seed, origin in enumerate(("top_left", "bottom_right")):
        experiment = memory_experiment(3, "Z", MemoryMode.PHENOMENOLOGICAL, origin)
        columns = list(range(experiment.code.num_stabilizers))
        rng = np.random.default_rng(100 + seed)
        total = np.zeros((4, len(columns)), dtype=int)
        for _ in range(shots):
            record = experiment.run(rng, ChannelNoise(noise_channel))
            total += record.detection_matrix(columns)
        counts.append(total.ravel())

    table = np.array(counts)
    table = table[:, table.sum(axis=0) > 0]
    assert table.shape[1] > 0
    _, p_value, _, _ = stats.chi2_contingency(table)
    assert p_value > 1e-3
    a, b = table.sum(axis=1)
    assert abs(a - b) < 4 * np.sqrt(a + b)


@pytest.mark.parametrize("origin", ["top_left", "bottom_right"])
@pytest.mark.parametrize("d", [3, 5])
def test_schedules_are_consistent(d, origin):
    """Every schedule noises each data qubit once and measures each check once"""
    code = build_code(d)
    assert check_schedule(code, phenomenological_schedule(code, origin)) == []
    assert check_schedule(code, circuit_level_schedule(code, True, origin)) == []
    assert check_schedule(code, circuit_level_schedule(code, False, origin)) == []


def test_check_schedule_reports_problems():
    """Measuring a check before its qubits are noised, or twice, is reported"""
    code = build_code(3)
    steps = phenomenological_schedule(code)
    first_measure = next(i for i, s in enumerate(steps) if s.kind == StepKind.MEASURE_STABILIZER)
    reordered = [steps[first_measure]] + steps[:first_measure] + steps[first_measure + 1:] + [steps[first_measure]]
    problems = check_schedule(code, reordered)
    assert any("before" in p for p in problems)
    assert any("measured 2 times" in p for p in problems)
    clash = [ScheduleStep(StepKind.GATE_LAYER, gates=(("CX", (0, 9)), ("CX", (0, 10))))]
    assert any("twice" in p for p in check_schedule(code, steps + clash))


def test_dump_schedule_lines():
    """One text line per step"""
    code = build_code(3)
    steps = circuit_level_schedule(code, layered=False)
    text = dump_schedule(steps)
    assert len(text.splitlines()) == len(steps)
    assert text.splitlines()[0].startswith("0\tGATE_LAYER\tR(")


def _layered_sites_per_round(code) -> int:
    per_check = sum(1 + 2 * (s.kind == "X") + 2 * s.weight + 2 for s in code.stabilizers)
    return code.num_data + per_check


def test_noise_site_counts():
    """Site totals follow from the schedule structure"""
    code = build_code(3)
    phenom = enumerate_noise_sites(code, phenomenological_schedule(code))
    assert len(phenom) == code.num_data + code.num_stabilizers
    layered = enumerate_noise_sites(code, circuit_level_schedule(code, True))
    assert len(layered) == _layered_sites_per_round(code)
    roles = {site.role for site in layered}
    assert roles == {SiteRole.IDLE, SiteRole.GATE, SiteRole.RESET, SiteRole.PRE_MEASURE, SiteRole.MEASUREMENT}


def test_extra_gate_adds_its_sites():
    """A two-qubit gate adds exactly two gate sites"""
    code = build_code(3)
    steps = phenomenological_schedule(code)
    before = len(expand_operations(code, steps))
    extra = steps + [ScheduleStep(StepKind.GATE_LAYER, gates=(("CX", (0, 1)),))]
    ops = expand_operations(code, extra)
    assert len(ops) == before + 3
    assert [op.site.role for op in ops[-2:]] == [SiteRole.GATE, SiteRole.GATE]


@pytest.mark.parametrize("mode", list(MemoryMode))
@pytest.mark.parametrize("basis", ["Z", "X"])
def test_noiseless_memory_is_silent(mode, basis):
    """No noise means an all-zero syndrome and a +1 logical readout"""
    experiment = memory_experiment(3, basis, mode)
    record = experiment.run(np.random.default_rng(1), postselect=True)
    assert record.syndrome.shape == (4, 8)
    assert not record.syndrome.any()
    assert record.logical_bit == 0
    assert not record.discarded
    assert record.noise_model == mode.value


def test_location_count():
    """Locations are d rounds of sites"""
    experiment = MemoryExperiment(3, "Z", MemoryMode.CIRCUIT_LAYERED)
    assert experiment.n == 17
    assert experiment.sites_per_round == _layered_sites_per_round(experiment.code)
    assert experiment.num_locations == 3 * experiment.sites_per_round


def test_full_bit_flip_noise_is_undetected():
    """Flipping every data qubit each round commutes with all checks but flips Z_L"""
    experiment = memory_experiment(3, "Z", MemoryMode.PHENOMENOLOGICAL)
    noise = ChannelNoise(NoiseChannel(ChannelKind.BIT_FLIP, 1.0), p_meas=0.0)
    record = experiment.run(np.random.default_rng(2), noise, postselect=True)
    assert not record.syndrome.any()
    assert not record.discarded
    assert record.logical_bit == 1


def test_entry_profile_tracking():
    """Profiles hold one count per non-gate operation"""
    experiment = memory_experiment(3, "Z", MemoryMode.PHENOMENOLOGICAL)
    noise_channel = NoiseChannel(ChannelKind.AMPLITUDE_DAMPING, 0.2)
    record = experiment.run(np.random.default_rng(3), ChannelNoise(noise_channel), track_profile=True)
    assert len(record.entry_profile) == experiment.d * len(experiment.operations)
    assert record.max_entries >= max(record.entry_profile)


def test_record_files(tmp_path):
    """Records write CSV and survive an npz round trip"""
    experiment = memory_experiment(3, "X", MemoryMode.PHENOMENOLOGICAL)
    record = experiment.run(np.random.default_rng(4))
    record.syndrome[1, 2] = 1
    record.to_csv(tmp_path / "record.csv")
    assert (tmp_path / "record.csv").read_text().splitlines()[0] == "round,stabilizer,bit"
    record.save_npz(tmp_path / "record.npz")
    again = SyndromeRecord.load_npz(tmp_path / "record.npz")
    assert np.array_equal(again.syndrome, record.syndrome)
    assert (again.d, again.basis, again.logical_bit) == (3, "X", record.logical_bit)


def test_detection_matrix():
    """Rows XOR their predecessor; the first row is compared with zeros"""
    syndrome = np.zeros((4, 8), dtype=np.uint8)
    syndrome[1:, 0] = 1
    record = SyndromeRecord(3, "Z", syndrome, 0)
    flips = record.detection_matrix([0, 1])
    assert flips[:, 0].tolist() == [0, 1, 0, 0]
    assert not flips[:, 1].any()


def test_single_round_on_prepared_state():
    """One noiseless sweep on the prepared data state gives a zero row"""
    code = build_code(3)
    state = memory_experiment(3, "Z").prepared_state()
    assert isinstance(state, PFSRState)
    state, row = run_phenomenological_round(state, code, None, 0.0, np.random.default_rng(5))
    assert not row.any()


def test_run_memory_experiment_wrapper():
    """The functional entry point matches the experiment object"""
    rng = np.random.default_rng(6)
    record = run_memory_experiment(3, "X", None, MemoryMode.CIRCUIT_PARALLEL, 0.0, rng)
    assert record.basis == "X"
    assert not record.syndrome.any()
    bit_flip = NoiseChannel(ChannelKind.BIT_FLIP, 1.0)
    flipped = run_memory_experiment(3, "Z", bit_flip, MemoryMode.PHENOMENOLOGICAL, 0.0, rng, p_meas=0.0)
    assert flipped.logical_bit == 1
