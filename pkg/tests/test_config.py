"""
Tests for experiment configs, JSON5 loading and run manifests
"""

import sys
from pathlib import Path

import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from config_loader import RunManifest, dumps_config, load_config, save_config
from experiment_models import ConfigError, ExperimentConfig, ExperimentKind, ImportanceSpec
from noise_channels import ChannelKind, ChannelMode
from surface_code import MemoryMode

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def base_config(**overrides) -> dict:
    data = {
        "experiment_id": "unit",
        "kind": "memory_threshold",
        "distances": [3, 5],
        "grid": [0.01, 0.02],
        "channel": {"kind": "depolarizing"},
        "shots": 10,
    }
    data.update(overrides)
    return data


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.json5")), ids=lambda p: p.stem)
def test_shipped_configs_load(path):
    """Every example config validates"""
    config = load_config(path)
    assert config.experiment_id
    assert config.schema_version == 1


def test_enums_are_coerced():
    """String fields become enums"""
    config = ExperimentConfig.from_dict(base_config(noise_model="circuit_parallel", compare_modes=["pta"]))
    assert config.kind == ExperimentKind.MEMORY_THRESHOLD
    assert config.noise_model == MemoryMode.CIRCUIT_PARALLEL
    assert config.channel.kind == ChannelKind.DEPOLARIZING
    assert config.modes == [ChannelMode.EXACT, ChannelMode.PTA]


def test_save_load_round_trip(tmp_path):
    """A saved config loads back unchanged"""
    config = load_config(CONFIG_DIR / "importance_sampling.json5")
    path = save_config(config, tmp_path / "copy.json5")
    assert load_config(path) == config
    assert "importance_sampling" in dumps_config(config)


def test_even_distance_names_the_field():
    """d=4 is rejected with the offending path"""
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(base_config(distances=[4]))
    assert info.value.field_path == "distances[0]"


@pytest.mark.parametrize(
    "overrides,field_path",
    [
        ({"grid": [0.02, 0.01]}, "grid"),
        ({"grid": [0.0, 0.01]}, "grid"),
        ({"colour": "blue"}, "colour"),
        ({"schema_version": 2}, "schema_version"),
        ({"basis": "Y"}, "basis"),
        ({"shots": None}, "shots"),
        ({"channel": {"kind": "depolarizing", "mode": "quasiprobability"}}, "channel.mode"),
        ({"channel": {"kind": "depolarizing", "strength": 1}}, "channel.strength"),
        ({"channel": {"kind": "measurement_flip"}}, "channel.kind"),
        ({"noise_model": "hexagonal"}, "noise_model"),
        ({"origin": "center"}, "origin"),
        ({"compare_modes": ["bogus"]}, "compare_modes[0]"),
    ],
)
def test_invalid_configs(overrides, field_path):
    """Each invalid field is reported by path"""
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(base_config(**overrides))
    assert info.value.field_path == field_path


def test_importance_needs_pauli_channel():
    """Fixed-k sampling is only defined for stochastic Pauli faults"""
    data = base_config(
        kind="importance_sampling",
        shots=None,
        budget=100,
        importance={"p_targets": [0.01]},
        channel={"kind": "coherent_z"},
    )
    with pytest.raises(ConfigError) as info:
        ExperimentConfig.from_dict(data)
    assert info.value.field_path == "channel.kind"
    with pytest.raises(ConfigError):
        ImportanceSpec(p_targets=[0.01], k_min=4, k_max=2)


def test_oracle_suite_needs_no_code():
    """Oracle configs fill in default sizes"""
    config = ExperimentConfig.from_dict({"experiment_id": "oracle", "kind": "oracle_suite"})
    assert config.oracle.circuits == 500
    assert not config.kind.needs_code


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json5")
    broken = tmp_path / "broken.json5"
    broken.write_text("{kind: ", encoding="utf-8")
    with pytest.raises(ConfigError) as info:
        load_config(broken)
    assert info.value.field_path == "<file>"


def test_manifest_replays_config(tmp_path):
    """A manifest loads as its config with the recorded seed"""
    config = ExperimentConfig.from_dict(base_config(seed=3))
    manifest = RunManifest(config, seed=17, workers=2)
    manifest.finish({"results.csv": 4})
    path = manifest.write(tmp_path)
    replay = load_config(path)
    assert replay.seed == 17
    assert replay.distances == config.distances
    assert replay.channel == config.channel
    assert manifest.to_dict()["versions"]["numpy"]


def test_point_spec_uses_config_fields():
    """Point specs carry the schedule, basis and cutoff"""
    config = ExperimentConfig.from_dict(base_config(basis="X", epsilon=1e-3, postselect=True))
    spec = config.point_spec(5, 0.02, mode=ChannelMode.EXACT)
    assert (spec.d, spec.basis, spec.epsilon, spec.postselect) == (5, "X", 1e-3, True)
    assert spec.param == pytest.approx(0.02)
