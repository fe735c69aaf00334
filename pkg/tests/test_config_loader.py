from pathlib import Path

import pytest

from config_loader import ConfigError, dump_config, load_config, parse_config
from network_model import FusionRule, MacModel, save_scenario
from sim import EventKind

MINIMAL = """\
schema_version: 1
name: "tiny"
seeds: [0, 1]
scenario:
  generate:
    num_sus: 3
    num_channels: 2
horizon: 50
"""


def test_minimal_config_fills_defaults():
    config = parse_config(MINIMAL)
    assert config.name == "tiny"
    assert config.seeds == [0, 1]
    assert config.horizon == 50
    assert config.window_slots == 600
    assert config.fusion_rule is FusionRule.AND
    assert config.mac_model is MacModel.ZERO_X
    assert config.speed_mps == 0.0
    assert config.events == ()
    assert config.get("scenario.generate.availability") == 0.2
    assert config.get("scenario.generate.missing", "x") == "x"
    assert config.emit("summary_json") and not config.emit("per_slot_csv")


def test_round_trip_is_identity():
    config = parse_config(MINIMAL + "fusion_rule: OR\nmobility: {speed_mps: 2.5}\n")
    assert parse_config(dump_config(config)) == config


def test_build_scenario_uses_replication_seed():
    config = parse_config(MINIMAL + "mac_model: 1/X\n")
    first = config.build_scenario(0)
    assert first.num_sus == 3 and first.num_channels == 2
    assert first.mac_model is MacModel.ONE_X
    assert config.build_scenario(0) == first
    assert config.build_scenario(1) != first
    assert config.build_scenario(0, num_channels=4).num_channels == 4


def test_events_are_parsed():
    config = parse_config(MINIMAL + "events:\n  - {slot: 10, kind: SET_SU_COUNT, value: 5}\n")
    assert config.events[0].kind is EventKind.SET_SU_COUNT
    assert config.events[0].slot == 10


@pytest.mark.parametrize(
    "extra, line",
    [
        ("fusion_rule: XOR\n", 9),
        ("events:\n  - {slot: 10, kind: SET_SU_COUNT, value: 5}\n  - {slot: 5, kind: SET_SU_COUNT, value: 6}\n", 11),
        ("radio:\n  bogus: 1\n", 10),
        ("mobility: {speed_mps: -1}\n", 9),
    ],
)
def test_errors_point_at_the_offending_line(extra, line):
    with pytest.raises(ConfigError) as excinfo:
        parse_config(MINIMAL + extra)
    assert excinfo.value.line == line
    assert str(excinfo.value).startswith(f"line {line}:")


def test_empty_seed_list_rejected():
    with pytest.raises(ConfigError, match="seeds"):
        parse_config(MINIMAL.replace("[0, 1]", "[]"))
    with pytest.raises(ConfigError):
        parse_config(MINIMAL).with_overrides(seeds=[])


def test_schema_version_required():
    with pytest.raises(ConfigError) as excinfo:
        parse_config(MINIMAL.replace("schema_version: 1", "schema_version: 2"))
    assert excinfo.value.line == 1


def test_unknown_sweep_variable():
    with pytest.raises(ConfigError, match="unknown sweep variable"):
        parse_config(MINIMAL + "sweep: {variable: Q, values: [1]}\n")


def test_sweeps_need_generated_scenarios(tmp_path, small_scenario):
    path = tmp_path / "scenario.json"
    save_scenario(small_scenario, path)
    text = MINIMAL.replace("  generate:\n    num_sus: 3\n    num_channels: 2\n", '  file: "scenario.json"\n')
    config = parse_config(text, base_dir=tmp_path)
    assert config.build_scenario(0) == small_scenario
    with pytest.raises(ConfigError, match="generated scenario"):
        parse_config(text + "sweep: {variable: N, values: [2, 3]}\n", base_dir=tmp_path)


def test_missing_scenario_file(tmp_path):
    text = MINIMAL.replace("  generate:\n    num_sus: 3\n    num_channels: 2\n", '  file: "nope.json"\n')
    with pytest.raises(ConfigError, match="not found"):
        parse_config(text, base_dir=tmp_path)


def test_invalid_yaml():
    with pytest.raises(ConfigError, match="Invalid YAML"):
        parse_config("seeds: [0, 1\n")
    with pytest.raises(ConfigError):
        parse_config("- just a list\n")


def test_overrides(tmp_path):
    config = parse_config(MINIMAL).with_overrides(seeds=[7], output_dir=tmp_path)
    assert config.seeds == [7]
    assert config.output_dir == tmp_path


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "missing.yaml")


def test_presets_load(preset_dir):
    presets = {p.stem: load_config(p) for p in sorted(Path(preset_dir).glob("*.yaml"))}
    assert set(presets) == {"split_sweep", "dynamic_population", "channel_sweep", "mobility_sweep"}
    assert presets["split_sweep"].sweep["md_coalition"] == pytest.approx(1e-4)
    assert [e.slot for e in presets["dynamic_population"].events] == [2000, 4000]
    assert presets["channel_sweep"].sweep["values"] == [2, 3, 4, 5, 6, 7, 8]
    assert presets["mobility_sweep"].sweep["channels"] == [3, 5, 7]


def test_example_config_loads():
    example = Path(__file__).parent.parent / "config" / "config.example.yaml"
    config = load_config(example)
    assert config.radio_params().md_budget == 0.01
    assert config.get("scenario.generate.bandwidth_hz") == pytest.approx(10e6)
