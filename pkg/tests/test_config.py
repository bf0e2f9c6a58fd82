import json
from pathlib import Path

import pytest

from stgncde.config import (
    RunConfig,
    build_config,
    config_defaults,
    config_keys,
    load_config,
    parse_override,
    save_config,
)
from stgncde.errors import ConfigError
from stgncde.presets import DATASET_PRESETS, DATASET_SUMMARY, preset_config

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_defaults_are_valid():
    config = RunConfig()
    assert config.variant == "full"
    assert config.window_steps == 11
    assert config.log_wall_time is False
    assert set(config_defaults()) == set(config_keys())


def test_unknown_key_lists_valid_keys():
    with pytest.raises(ConfigError) as info:
        build_config({"hidden_size": 64})
    message = str(info.value)
    assert "hidden_size" in message
    for key in ("hidden_h", "embed_dim", "missing_rate"):
        assert key in message


def test_learning_rate_must_be_on_the_grid():
    with pytest.raises(ConfigError):
        RunConfig(lr=2e-3)
    assert RunConfig(lr=2e-3, allow_off_grid=True).lr == 2e-3


def test_weight_decay_must_be_on_the_grid():
    with pytest.raises(ConfigError):
        RunConfig(weight_decay=0.5)


@pytest.mark.parametrize("changes", [
    {"missing_rate": 1.0},
    {"hidden_h": 0},
    {"solver": "dopri5"},
    {"variant": "gru"},
    {"dataset": "csv"},
    {"epochs": True},
    {"input_len": 1},
])
def test_invalid_values(changes):
    with pytest.raises(ConfigError):
        RunConfig(**changes)


def test_variant_aliases_are_normalised():
    assert RunConfig(variant="temporal").variant == "temporal_only"


def test_parse_override_reads_json_literals():
    assert parse_override("hidden_h=64") == ("hidden_h", 64)
    assert parse_override("decoupled_weight_decay=true") == ("decoupled_weight_decay", True)
    assert parse_override("variant=spatial") == ("variant", "spatial")
    with pytest.raises(ConfigError):
        parse_override("hidden_h")


def test_overrides_win_over_file_values(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"hidden_h": 16, "epochs": 3}))
    config = load_config(path, ["epochs=5"])
    assert config.hidden_h == 16 and config.epochs == 5


def test_missing_or_invalid_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_save_and_reload(tmp_path):
    config = RunConfig(hidden_h=8, seed=3)
    save_config(config, tmp_path / "config.json")
    assert load_config(tmp_path / "config.json") == config


def test_pemsd4_template_resolves():
    config = load_config(CONFIG_DIR / "pemsd4.json")
    assert (config.num_layers, config.embed_dim, config.hidden_h, config.hidden_z) == (2, 8, 64, 64)
    assert config.values_csv.endswith("data/pemsd4/values.csv")


@pytest.mark.parametrize("key", sorted(DATASET_PRESETS))
def test_templates_match_presets(key):
    with open(CONFIG_DIR / f"{key}.json") as f:
        template = json.load(f)
    for name, value in preset_config(key).items():
        assert template[name] == value, name
    assert key in DATASET_SUMMARY


def test_toy_template():
    config = load_config(CONFIG_DIR / "toy.json")
    assert config.dataset == "synthetic"
    assert (config.synthetic_nodes, config.synthetic_steps, config.epochs) == (5, 2000, 500)
