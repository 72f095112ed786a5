"""
Tests for the experiment runners, config validation and the command line
"""

import sys
from pathlib import Path

import pandas as pd
import pytest

# Add project root and src to path
ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(ROOT))
sys.path.insert(0, str(ROOT / "src"))

import cli
from experiment_models import ExperimentConfig, OracleSpec
from experiments import RUNNERS, get_runner
from experiments.oracle_suite import run_oracle_suite, suite_frame
from experiments.validation import validate_config
from statistics_calculator import StatisticsCalculator


def small_config(**overrides) -> ExperimentConfig:
    data = {
        "experiment_id": "small",
        "kind": "memory_threshold",
        "distances": [3],
        "grid": [0.05],
        "channel": {"kind": "depolarizing", "mode": "exact"},
        "shots": 6,
        "seed": 11,
        "workers": 1,
    }
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def write_config(path: Path, body: str) -> Path:
    path.write_text(body, encoding="utf-8")
    return path


SMALL_JSON5 = """
// tiny run
{
  experiment_id: "cli_small",
  kind: "memory_threshold",
  distances: [3],
  grid: [0.04, 0.08],
  channel: {kind: "amplitude_damping", mode: "exact"},
  shots: 5,
  seed: 4,
  workers: 1,
}
"""


def test_every_kind_has_a_runner():
    config = small_config()
    assert isinstance(get_runner(config), RUNNERS[config.kind])


def test_memory_threshold_runner_is_deterministic():
    """Same seed, same rows; one row per mode and point"""
    config = small_config(compare_modes=["pta"])
    first = get_runner(config).run()
    second = get_runner(config).run()
    assert len(first.results) == 2
    assert first.results_table().equals(second.results_table())
    assert {r.mode for r in first.results} == {"exact", "pta"}


def test_runner_overrides():
    """Command-line seed and shots replace the config values"""
    runner = get_runner(small_config(), seed=99, shots=3)
    assert (runner.seed, runner.shots, runner.workers) == (99, 3, 1)
    assert runner.run().results[0].shots == 3


def test_truncation_sweep_summary():
    """One summary row per cutoff, compared with the smallest cutoff"""
    config = small_config(
        kind="truncation_sweep",
        grid=[0.01],
        channel={"kind": "coherent_z"},
        epsilons=[1e-3, 0.0],
        shots=4,
    )
    output = get_runner(config).run()
    summary = output.tables["truncation_summary"]
    assert list(summary["epsilon"]) == [0.0, 1e-3]
    assert summary.loc[0, "entry_ratio"] == 1.0
    assert output.row_counts() == {"results.csv": 2, "truncation_summary.csv": 2}


def test_schedule_compare_single_distance():
    """Both schedules run; thresholds need two distances"""
    config = small_config(kind="schedule_compare", grid=[0.002], shots=2)
    output = get_runner(config).run()
    assert {r.noise_model for r in output.results} == {"circuit_layered", "circuit_parallel"}
    assert "Only one distance" in output.messages[0]


def test_importance_sampling_runner():
    """Pilot, allocation and curve rows for a small window"""
    config = small_config(
        kind="importance_sampling",
        grid=[0.01, 0.02],
        shots=None,
        budget=60,
        importance={"p_targets": [0.02], "k_min": 0, "k_max": 4, "pilot_shots": 6},
    )
    output = get_runner(config).run()
    counts = output.tables["fault_counts"]
    assert list(counts["k"]) == [0, 1, 2, 3, 4]
    assert (counts.loc[counts["k"] < 2, "failures"] == 0).all()
    curves = output.tables["importance_curves"]
    assert list(curves["p"]) == [0.01, 0.02]
    assert all(r.k_or_total == "importance" for r in output.results)
    assert (curves["p_fail"] >= 0).all()


def test_sparsity_profile_within_bound():
    """Entry counts of amplitude-damped trajectories stay within 2^d"""
    config = small_config(kind="sparsity_profile", grid=[0.1], channel={"kind": "amplitude_damping"}, shots=4)
    output = get_runner(config).run()
    profile = output.tables["sparsity_profile"]
    assert profile.loc[0, "bound"] == 8
    assert bool(profile.loc[0, "within_bound"])
    assert "within" in output.messages[0]


def test_small_oracle_suite_passes():
    """Sparse and dense simulators agree on random circuits"""
    cases = run_oracle_suite(OracleSpec(circuits=25, max_qubits=4, depth=20), seed=5)
    frame = suite_frame(cases)
    assert frame["passed"].all()
    assert (frame["fidelity"] > 1 - 1e-8).all()


def test_validate_reports_code_sizes():
    """Dry run lists code sizes, schedules and fault counts"""
    report = validate_config(small_config(distances=[5]))
    assert report.ok
    text = "\n".join(report.lines())
    assert "d=5: 25 data qubits, 24 stabilizers" in text
    assert "fault locations" in text


def test_validate_warns_about_window():
    """A window above the zero-block floor is flagged"""
    config = small_config(
        kind="importance_sampling",
        shots=None,
        budget=100,
        importance={"p_targets": [0.01], "k_min": 5, "k_max": 9},
    )
    report = validate_config(config)
    assert report.ok
    assert any("excludes k=3" in w for w in report.warnings)
    assert any("zero-block floor" in w for w in report.warnings)


def test_cli_run_and_replay(tmp_path, capsys):
    """A run writes results and a manifest; replaying the manifest reproduces them"""
    config = write_config(tmp_path / "small.json5", SMALL_JSON5)
    assert cli.main(["run", "--config", str(config), "--out", str(tmp_path / "first")]) == cli.EXIT_OK
    first = tmp_path / "first" / "results.csv"
    assert len(pd.read_csv(first)) == 2
    assert "Manifest" in capsys.readouterr().out

    manifest = tmp_path / "first" / "manifest.json"
    assert cli.main(["run", "--config", str(manifest), "--out", str(tmp_path / "second")]) == cli.EXIT_OK
    assert (tmp_path / "second" / "results.csv").read_text() == first.read_text()

    assert cli.main(["report", str(tmp_path / "first"), "--out", str(tmp_path / "plots")]) == cli.EXIT_OK
    assert (tmp_path / "plots" / "plot_data.csv").exists()


def test_cli_validate_exit_codes(tmp_path, capsys):
    """Valid configs exit 0; invalid ones exit 2 and name the field"""
    good = write_config(tmp_path / "good.json5", SMALL_JSON5)
    assert cli.main(["validate", "--config", str(good)]) == cli.EXIT_OK
    bad = write_config(tmp_path / "bad.json5", SMALL_JSON5.replace("distances: [3]", "distances: [4]"))
    assert cli.main(["validate", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert "distances[0]" in capsys.readouterr().out
    assert cli.main(["run", "--config", str(bad)]) == cli.EXIT_CONFIG


def test_cli_oracle_and_missing_results(tmp_path):
    assert cli.main(["oracle", "--circuits", "5", "--max-qubits", "3", "--depth", "10", "--seed", "2"]) == cli.EXIT_OK
    assert cli.main(["report", str(tmp_path / "missing.csv")]) == cli.EXIT_RUNTIME


@pytest.mark.slow
def test_shipped_configs_validate():
    """Every shipped config passes the dry run"""
    for path in sorted((ROOT / "configs").glob("*.json5")):
        assert validate_config(cli.load_config(path)).ok, path.name


def test_cli_manifest_records_overrides(tmp_path):
    """Replaying a manifest repeats a run made with command-line overrides"""
    config = write_config(tmp_path / "small.json5", SMALL_JSON5)
    args = ["run", "--config", str(config), "--shots", "3", "--seed", "8", "--out", str(tmp_path / "first")]
    assert cli.main(args) == cli.EXIT_OK
    first = tmp_path / "first" / "results.csv"
    assert (pd.read_csv(first)["shots"] == 3).all()

    replay = cli.load_config(tmp_path / "first" / "manifest.json")
    assert (replay.shots, replay.seed) == (3, 8)
    assert replay.output == str(tmp_path / "first")

    manifest = tmp_path / "first" / "manifest.json"
    assert cli.main(["run", "--config", str(manifest), "--out", str(tmp_path / "second")]) == cli.EXIT_OK
    assert (tmp_path / "second" / "results.csv").read_text() == first.read_text()


def test_validate_warns_about_z_memory_under_z_noise():
    """Coherent Z noise needs an X-basis memory to reach the logical"""
    report = validate_config(small_config(channel={"kind": "coherent_z"}))
    assert any("basis \"X\"" in w for w in report.warnings)
    report = validate_config(small_config(channel={"kind": "coherent_z"}, basis="X"))
    assert not report.warnings


def rate_table(output) -> dict:
    """(mode, noise_model, d, param) → rate"""
    return {(r.mode, r.noise_model, r.d, round(r.param, 9)): r.rate for r in output.results}


@pytest.mark.slow
def test_sparsity_profile_acceptance():
    """Amplitude damping at γ=0.15 stays within 2^d at d = 3, 5, 7 over 100 trajectories"""
    config = cli.load_config(ROOT / "configs" / "sparsity_profile.json5")
    assert (config.distances, config.grid, config.shots) == ([3, 5, 7], [0.15], 100)
    output = get_runner(config).run()
    profile = output.tables["sparsity_profile"]
    assert list(profile["d"]) == [3, 5, 7]
    assert (profile["trajectories"] == 100).all()
    assert profile["within_bound"].all()
    assert (profile["max_entries"] <= profile["bound"]).all()
    assert (profile["geometric_mean"] >= 1).all()
    assert (profile["geometric_mean"] <= profile["max_entries"]).all()
    means = profile.set_index("d")["geometric_mean"]
    print("Geometric-mean peak entries:", means.round(2).to_dict())


@pytest.mark.slow
def test_amplitude_damping_threshold_bracket():
    """d=5 beats d=3 well below γ ≈ 0.07 and loses well above it, exact and twirled"""
    config = small_config(
        distances=[3, 5],
        grid=[0.03, 0.12],
        channel={"kind": "amplitude_damping", "mode": "exact"},
        compare_modes=["pta"],
        shots=2000,
        seed=20240601,
        workers=None,
    )
    rates = rate_table(get_runner(config).run())
    for mode in ("exact", "pta"):
        assert rates[(mode, "phenomenological", 5, 0.03)] < rates[(mode, "phenomenological", 3, 0.03)]
        assert rates[(mode, "phenomenological", 5, 0.12)] > rates[(mode, "phenomenological", 3, 0.12)]


@pytest.mark.slow
def test_coherent_threshold_bracket():
    """Phenomenological coherent rotations cross between sin²(θ/2) = 0.01 and 0.045"""
    config = small_config(
        distances=[3, 5],
        grid=[0.01, 0.045],
        channel={"kind": "coherent_z", "mode": "exact"},
        basis="X",
        shots=2000,
        seed=20240602,
        workers=None,
    )
    rates = rate_table(get_runner(config).run())
    assert rates[("exact", "phenomenological", 5, 0.01)] < rates[("exact", "phenomenological", 3, 0.01)]
    assert rates[("exact", "phenomenological", 5, 0.045)] > rates[("exact", "phenomenological", 3, 0.045)]


@pytest.mark.slow
def test_schedule_compare_bracket():
    """Layered and parallel extraction both cross between p = 0.001 and 0.01"""
    config = small_config(
        kind="schedule_compare",
        distances=[3, 5],
        grid=[0.001, 0.01],
        shots=1500,
        seed=20240603,
        workers=None,
    )
    rates = rate_table(get_runner(config).run())
    for model in ("circuit_layered", "circuit_parallel"):
        assert rates[("exact", model, 5, 0.001)] <= rates[("exact", model, 3, 0.001)]
        assert rates[("exact", model, 5, 0.01)] > rates[("exact", model, 3, 0.01)]


@pytest.mark.slow
def test_coherent_noise_is_worse_than_its_twirl():
    """Circuit-level coherent rotations fail more often than their Pauli twirl at the same rate"""
    config = small_config(
        distances=[3],
        grid=[0.001],
        channel={"kind": "coherent_z", "mode": "exact"},
        compare_modes=["pta"],
        noise_model="circuit_layered",
        basis="X",
        epsilon=1e-4,
        shots=1500,
        seed=20240607,
        workers=None,
    )
    output = get_runner(config).run()
    exact, pta = sorted(output.results, key=lambda r: r.mode)
    assert (exact.mode, pta.mode) == ("exact", "pta")
    assert exact.rate - pta.rate > 3 * (exact.stderr ** 2 + pta.stderr ** 2) ** 0.5


@pytest.mark.slow
def test_truncation_robustness():
    """Cutoffs 1e-5 and 1e-4 agree on the logical rate; no cutoff keeps the most entries"""
    config = small_config(
        kind="truncation_sweep",
        distances=[3],
        grid=[0.002],
        channel={"kind": "coherent_z"},
        noise_model="circuit_layered",
        basis="X",
        epsilons=[0.0, 1e-5, 1e-4],
        shots=1000,
        seed=20240604,
        workers=None,
    )
    summary = get_runner(config).run().tables["truncation_summary"].set_index("epsilon")
    a, b = summary.loc[1e-5], summary.loc[1e-4]
    assert abs(StatisticsCalculator.z_difference(a["rate"], a["stderr"], b["rate"], b["stderr"])) < 3
    assert summary.loc[0.0, "max_entries"] >= summary.loc[1e-4, "max_entries"]
    assert (summary["entry_ratio"] >= 1).all()
