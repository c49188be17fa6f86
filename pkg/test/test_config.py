import json

import numpy as np
import pytest

from rydberg_squeezing.config import (
    MODE_DEFAULTS,
    RunConfig,
    build_config,
    defaults_applied,
    load_document,
    parse_config,
    parse_override,
    render_config,
)
from rydberg_squeezing.errors import ConfigError


def test_fig3_defaults():
    config = build_config({"mode": "fig3"})
    assert config.n_atoms == 20
    assert config.delta_mhz == 50
    assert config.delta_prime_mhz == 20
    assert config.omega0_mhz == 1.1
    assert config.phase_convention == "audit"
    assert config.t_final_us == 250
    assert config.frequency("delta_mhz") == pytest.approx(2 * np.pi * 50)
    assert config.output_file("summary.txt").name == "fig3_summary.txt"


def test_angular_units():
    config = build_config({"mode": "oracle", "angular_units": True})
    assert config.frequency("delta_mhz") == 50
    assert "angular" in config.unit_note


def test_ideal_duration_default():
    config = build_config({"mode": "ideal", "n_atoms": 20, "omega_eff": 1.0})
    assert config.t_final_us == pytest.approx(np.log(20) / 40)
    explicit = build_config({"mode": "ideal", "omega_eff": 1.0, "t_final_us": 3.0})
    assert explicit.t_final_us == 3.0


@pytest.mark.parametrize(
    "document, key",
    [
        ({"mode": "ideal", "n_atoms": -1, "omega_eff": 1.0}, "n_atoms"),
        ({"mode": "loss", "colour": "red"}, "colour"),
        ({"mode": "ideal"}, "omega_eff"),
        ({"mode": "fig3", "delta_prime_mhz": 60.0}, "delta_prime_mhz"),
        ({"mode": "fig3", "phase_convention": "+0"}, "phase_convention"),
        ({"mode": "fig3", "t_final_us": -1.0}, "t_final_us"),
        ({"mode": "loss", "n_lost": 100}, "n_lost"),
        ({"mode": "oracle", "n_atoms": 50}, "n_atoms"),
        ({"mode": "feasibility", "s_target": 1.0}, "s_target"),
        ({"mode": "sweep"}, "mode"),
        ({"n_atoms": 3}, "mode"),
    ],
)
def test_invalid_configs_name_the_key(document, key):
    with pytest.raises(ConfigError) as error:
        build_config(document)
    assert error.value.key == key


def test_parse_rejects_bad_json():
    with pytest.raises(ConfigError) as error:
        parse_config("{mode: fig3")
    assert error.value.key == "config"
    with pytest.raises(ConfigError):
        parse_config("[1, 2]")


@pytest.mark.parametrize("mode", sorted(MODE_DEFAULTS))
def test_render_parse_round_trip(mode):
    document = {"mode": mode, "omega_eff": 0.5} if mode == "ideal" else {"mode": mode}
    config = build_config(document)
    assert parse_config(render_config(config)) == config


def test_render_is_canonical():
    text = render_config(build_config({"mode": "loss"}))
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_configs_are_frozen():
    config = build_config({"mode": "loss"})
    with pytest.raises(Exception):
        config.n_atoms = 3
    assert isinstance(config, RunConfig)


def test_defaults_applied():
    assert defaults_applied({"mode": "loss", "n_atoms": 50}) == ["n_lost", "s_before"]
    assert "t_final_us" in defaults_applied({"mode": "ideal", "omega_eff": 1.0})


@pytest.mark.parametrize(
    "text, expected",
    [
        ("n_atoms=10", ("n_atoms", 10)),
        ("phase_convention=++", ("phase_convention", "++")),
        ("angular_units=true", ("angular_units", True)),
        (" delta_mhz = 40.5", ("delta_mhz", 40.5)),
    ],
)
def test_parse_override(text, expected):
    assert parse_override(text) == expected


@pytest.mark.parametrize("text", ["n_atoms", "=3"])
def test_invalid_override(text):
    with pytest.raises(ConfigError):
        parse_override(text)


def test_load_document_merges_file_and_overrides(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mode": "loss", "n_atoms": 50, "n_lost": 2}))
    document = load_document(path, ["n_lost=5"], mode="loss")
    assert document == {"mode": "loss", "n_atoms": 50, "n_lost": 5}
    assert build_config(document).s_before == 10


def test_load_document_rejects_mode_mismatch(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"mode": "loss"}))
    with pytest.raises(ConfigError) as error:
        load_document(path, mode="ideal")
    assert error.value.key == "mode"


def test_load_document_rejects_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_document(tmp_path / "missing.json")
    path = tmp_path / "list.json"
    path.write_text("[]")
    with pytest.raises(ConfigError):
        load_document(path)
