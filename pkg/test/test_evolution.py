import numpy as np
import pytest

from rydberg_squeezing.errors import InvalidStateError
from rydberg_squeezing.evolution import (
    EvolverBase,
    SqueezingSample,
    SqueezingTrace,
    run_in_parallel,
)
from rydberg_squeezing.spin_core import DickeState, build_basis


class FrozenEvolver(EvolverBase):
    """Keeps the initial state for ``n_steps`` records."""

    label = "frozen"

    def __init__(self, basis, n_steps):
        self.basis = basis
        self.n_steps = n_steps

    def _iter_states(self, initial):
        for step in range(self.n_steps + 1):
            yield 0.1 * step, initial.amplitudes

    @property
    def n_records(self):
        return self.n_steps + 1


def test_evolver_base_builds_a_trace():
    basis = build_basis(4, 0)
    trace = FrozenEvolver(basis, 3).run(DickeState.all_in_a(basis), metadata={"n_atoms": 4})
    assert len(trace) == 4
    assert trace.times == pytest.approx([0, 0.1, 0.2, 0.3])
    assert trace.s_factors == pytest.approx(np.ones(4))
    assert trace.max_squeezing() == (pytest.approx(1), 0.0)
    assert trace.final_state.basis == basis
    assert list(trace.to_dataframe().columns) == ["t_us", "S", "nb_mean", "nr_mean", "norm"]


def test_evolver_rejects_foreign_initial_state():
    evolver = FrozenEvolver(build_basis(4, 0), 1)
    with pytest.raises(InvalidStateError):
        evolver.run(DickeState.all_in_a(build_basis(4, 1)))


def test_sample_from_state():
    state = DickeState.from_configuration(build_basis(4, 0), 2)
    sample = SqueezingSample.from_state(0.5, state)
    assert sample.nb_mean == pytest.approx(2)
    assert sample.s_factor == pytest.approx(1 / 3)
    assert sample.to_row()["S"] == sample.s_factor
    assert sample.to_dict()["t"] == 0.5


def test_trace_rejects_unnormalized_rows():
    sample = SqueezingSample(t=0.0, s_factor=1.0, nb_mean=0.0, nr_mean=0.0, norm=1.1)
    with pytest.raises(InvalidStateError):
        SqueezingTrace(samples=[sample])


@pytest.mark.parametrize("num_workers", [1, 2])
def test_run_in_parallel_keeps_the_order(num_workers):
    items = [-3, 1, -2, 5]
    assert run_in_parallel(abs, items, num_workers=num_workers) == [3, 1, 2, 5]


def test_run_in_parallel_unordered():
    results = run_in_parallel(abs, [-3, 1, -2], num_workers=2, ordered_results=False)
    assert sorted(results) == [1, 2, 3]
