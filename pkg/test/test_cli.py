import json

import pytest

from rydberg_squeezing.cli import (
    EXIT_CONFIG_ERROR,
    EXIT_NUMERICAL_ERROR,
    EXIT_OK,
    build_parser,
    main,
)
from rydberg_squeezing.traces import read_summary, read_trace


def run_main(tmp_path, mode, *overrides, document=None):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"output_path": str(tmp_path / "out"), **(document or {})}))
    argv = [mode, "--config", str(path), "--no-progress"]
    for override in overrides:
        argv += ["--set", override]
    return main(argv)


def test_loss_mode(tmp_path):
    assert run_main(tmp_path, "loss") == EXIT_OK
    summary = read_summary(tmp_path / "out" / "loss_summary.txt")
    assert summary["s_after"] == pytest.approx(5)
    assert summary["loss_negligible"] is False
    assert summary["mode"] == "loss"
    assert summary["defaults_applied"] == ["n_atoms", "n_lost", "s_before"]


def test_feasibility_mode(tmp_path):
    assert run_main(tmp_path, "feasibility") == EXIT_OK
    summary = read_summary(tmp_path / "out" / "feasibility_summary.txt")
    assert summary["feasible"] is True
    assert summary["blockade_radius"] == pytest.approx(3.0)
    assert summary["min_detuning_mhz"] == pytest.approx(5.756, rel=1e-3)


def test_small_ideal_run(tmp_path):
    assert run_main(tmp_path, "ideal", "n_atoms=6", "omega_eff=1.0") == EXIT_OK
    trace = read_trace(tmp_path / "out" / "ideal_trace.csv")
    summary = read_summary(tmp_path / "out" / "ideal_summary.txt")
    assert summary["s_max"] == pytest.approx(trace.s_factors.max())
    assert trace.metadata["config"]["n_atoms"] == 6
    assert "t_final_us" in summary["defaults_applied"]
    assert summary["unit_note"].startswith("frequencies in MHz")


def test_small_blockade_run(tmp_path):
    overrides = ["n_atoms=2", "t_final_us=0.5", "phase_convention=++"]
    assert run_main(tmp_path, "blockade", *overrides) == EXIT_OK
    trace = read_trace(tmp_path / "out" / "blockade_trace.csv")
    assert trace.times[-1] == pytest.approx(0.5, abs=0.05)
    summary = read_summary(tmp_path / "out" / "blockade_summary.txt")
    assert summary["phase_convention"] == "++"
    assert summary["nr_ok"] is True


def test_invalid_override_exits_with_config_error(tmp_path, capsys):
    assert run_main(tmp_path, "loss", "n_atoms=-1") == EXIT_CONFIG_ERROR
    assert "n_atoms" in capsys.readouterr().err
    assert not (tmp_path / "out").exists()


def test_mode_mismatch_exits_with_config_error(tmp_path):
    assert run_main(tmp_path, "ideal", document={"mode": "loss"}) == EXIT_CONFIG_ERROR


def test_coarse_step_exits_with_numerical_error(tmp_path, capsys):
    overrides = ["n_atoms=20", "omega_eff=1.0", "t_final_us=10.0", "n_steps=1"]
    assert run_main(tmp_path, "ideal", *overrides) == EXIT_NUMERICAL_ERROR
    assert "StepSizeError" in capsys.readouterr().err


def test_parser_requires_a_mode():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])
