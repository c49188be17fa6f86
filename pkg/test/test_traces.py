import numpy as np
import pytest

from rydberg_squeezing.evolution import SqueezingSample, SqueezingTrace
from rydberg_squeezing.ideal_model import IdealConfig, evolve_ideal
from rydberg_squeezing.traces import (
    compare_traces,
    read_summary,
    read_trace,
    to_jsonable,
    trace_to_csv,
    write_summary,
    write_trace,
)


def make_trace(times, s_factors, n_atoms=10):
    samples = [
        SqueezingSample(t=t, s_factor=s, nb_mean=(s - 1) / 4, nr_mean=0.0, norm=1.0)
        for t, s in zip(times, s_factors)
    ]
    return SqueezingTrace(samples=samples, metadata={"model": "ideal", "n_atoms": n_atoms})


def test_trace_round_trip(tmp_path):
    trace = evolve_ideal(IdealConfig(6, 1.0, 0.05, 50))
    config = {"mode": "ideal", "n_atoms": 6, "omega_eff": 1.0}
    path = write_trace(trace, tmp_path / "out" / "ideal_trace.csv", config=config)
    assert path.exists()
    restored = read_trace(path)
    assert len(restored) == len(trace) == 51
    assert restored.times == pytest.approx(trace.times, rel=1e-10)
    assert restored.s_factors == pytest.approx(trace.s_factors, rel=1e-10)
    assert restored.nb_means == pytest.approx(trace.nb_means, rel=1e-10, abs=1e-12)
    assert restored.metadata["n_atoms"] == 6
    assert restored.metadata["config"] == config


def test_trace_text_is_deterministic():
    config = {"mode": "ideal", "n_atoms": 4}
    first = trace_to_csv(evolve_ideal(IdealConfig(4, 1.0, 0.02, 20)), config)
    second = trace_to_csv(evolve_ideal(IdealConfig(4, 1.0, 0.02, 20)), config)
    assert first == second
    assert first.startswith("# rydberg_squeezing")
    assert "t_us,S,nb_mean,nr_mean,norm" in first


def test_read_trace_rejects_missing_columns(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("# rydberg_squeezing 0.1.0\nt_us,S\n0,1\n")
    with pytest.raises(ValueError):
        read_trace(path)


def test_to_jsonable():
    value = {"c": np.complex128(1 + 2j), "a": np.arange(2), "x": np.float64(0.5), 1: float("inf")}
    assert to_jsonable(value) == {"c": {"re": 1.0, "im": 2.0}, "a": [0, 1], "x": 0.5, "1": "inf"}


def test_summary_round_trip(tmp_path):
    summary = {"mode": "loss", "s_after": 5.0, "violations": ["pump"], "feasible": False}
    path = write_summary(summary, tmp_path / "summary.txt")
    assert path.read_text().splitlines()[0] == "feasible=false"
    assert read_summary(path) == summary


def test_compare_identical_traces():
    trace = make_trace([0, 1, 2, 3], [1, 2, 4, 8])
    comparison = compare_traces(trace, trace)
    assert comparison.max_relative_deviation == 0
    assert comparison.n_points == 4


def test_compare_interpolates_and_windows():
    a = make_trace([0.5, 1.5, 2.5], [1.1, 2.2, 3.3])
    b = make_trace([0, 1, 2, 3], [1, 2, 3, 4])
    comparison = compare_traces(a, b, window=(1, 3))
    # b at 1.5 and 2.5 is 2.5 and 3.5
    assert comparison.n_points == 2
    assert comparison.window == (1.0, 2.5)
    assert comparison.max_relative_deviation == pytest.approx(0.3 / 2.5)
    assert comparison.to_dict()["n_points"] == 2


def test_compare_rejects_different_atom_numbers():
    with pytest.raises(ValueError):
        compare_traces(make_trace([0, 1], [1, 2], 10), make_trace([0, 1], [1, 2], 20))


def test_compare_rejects_disjoint_grids():
    with pytest.raises(ValueError):
        compare_traces(make_trace([0, 1], [1, 2]), make_trace([2, 3], [1, 2]))
    with pytest.raises(ValueError):
        compare_traces(make_trace([0, 1], [1, 2]), make_trace([0, 1], [1, 2]), window=(5, 6))


def test_trace_rejects_decreasing_times():
    with pytest.raises(ValueError):
        make_trace([1, 0], [1, 1])
