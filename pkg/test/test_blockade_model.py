import logging

import numpy as np
import pytest

from rydberg_squeezing.blockade_model import (
    BlockadeConfig,
    build_time_dependent_hamiltonian,
    evolve_blockade,
    filtered_phase_slope,
    make_plan,
    max_stable_step,
    sector_light_shifts,
    single_laser_run,
)
from rydberg_squeezing.errors import InvalidStateError, StepSizeError
from rydberg_squeezing.ideal_model import IdealPrediction
from rydberg_squeezing.lasers import single_laser_set, standard_six_laser_set
from rydberg_squeezing.perturbation_oracle import perturbative_pair_coupling
from rydberg_squeezing.spin_core import DickeState, build_basis

# Small angular-unit operating point whose frame frequencies are multiples of 4.
TOY_LASERS = standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, phase_convention="++")
TOY_PERIOD = 2 * np.pi / 4


def blockaded_shift(n_a, omega, delta):
    """Exact shift of |n_a> coupled to |n_a - 1, 1> only."""
    return (delta - np.sqrt(delta**2 + 4 * n_a * omega**2)) / 2


def test_hamiltonian_structure():
    basis = build_basis(3, 1)
    hamiltonian = build_time_dependent_hamiltonian(basis, TOY_LASERS)
    assert sorted(hamiltonian.frequencies) == pytest.approx([-24, -20, -16, -4, 4])
    assert hamiltonian.base_frequency() == pytest.approx(4)
    at_t = hamiltonian(0.37).toarray()
    assert np.allclose(at_t, at_t.conj().T)
    psi = np.arange(basis.dimension, dtype=complex)
    assert hamiltonian.apply(0.37, psi) == pytest.approx(at_t @ psi)
    assert hamiltonian.norm_bound() >= np.abs(at_t).sum(axis=1).max()
    assert np.allclose(np.diag(hamiltonian.static.toarray()).real, 10.0 * basis.n_r)


def test_hamiltonian_needs_rydberg_configurations():
    with pytest.raises(ValueError):
        build_time_dependent_hamiltonian(build_basis(3, 0), TOY_LASERS)


def test_max_stable_step():
    hamiltonian = build_time_dependent_hamiltonian(build_basis(3, 1), TOY_LASERS)
    dt = max_stable_step(hamiltonian, 0.02)
    assert dt * hamiltonian.norm_bound() <= 0.02 + 1e-12
    assert dt * 24 <= 0.02 + 1e-12


def test_periodic_plan_divides_the_period():
    hamiltonian = build_time_dependent_hamiltonian(build_basis(3, 1), TOY_LASERS)
    plan = make_plan(hamiltonian, dt=1e-3, t_final=10 * TOY_PERIOD, record_every=3000)
    assert plan.periodic
    assert plan.dt * plan.period_steps == pytest.approx(TOY_PERIOD)
    assert plan.steps_per_record % plan.period_steps == 0
    assert plan.n_records * plan.record_interval == pytest.approx(10 * TOY_PERIOD, rel=0.1)
    assert not make_plan(hamiltonian, 1e-3, 1.0, use_periodic=False).periodic


def test_coarse_step_is_rejected():
    with pytest.raises(StepSizeError):
        BlockadeConfig(3, TOY_LASERS, t_final=1.0, dt=0.01)
    with pytest.raises(StepSizeError):
        BlockadeConfig(3, TOY_LASERS, t_final=1.0, dt=-1.0)


def test_periodic_and_direct_paths_agree():
    hamiltonian = build_time_dependent_hamiltonian(build_basis(3, 1), TOY_LASERS)
    period_steps = int(np.ceil(TOY_PERIOD / max_stable_step(hamiltonian)))
    dt = TOY_PERIOD / period_steps
    traces = [
        evolve_blockade(
            BlockadeConfig(
                3,
                TOY_LASERS,
                t_final=4 * TOY_PERIOD,
                dt=dt,
                record_every=period_steps,
                use_periodic=use_periodic,
            )
        )
        for use_periodic in (True, False)
    ]
    periodic, direct = traces
    assert periodic.metadata["periodic"] and not direct.metadata["periodic"]
    assert len(periodic) == len(direct) == 5
    assert periodic.times == pytest.approx(direct.times)
    assert periodic.s_factors == pytest.approx(direct.s_factors, abs=1e-9)
    assert periodic.nb_means == pytest.approx(direct.nb_means, abs=1e-9)


def test_rotating_frame_does_not_change_observables():
    traces = [
        evolve_blockade(BlockadeConfig.with_automatic_step(3, lasers, t_final=4 * TOY_PERIOD))
        for lasers in (TOY_LASERS, TOY_LASERS.shifted(4.0))
    ]
    first, shifted = (
        np.interp(np.linspace(0, 4 * TOY_PERIOD, 9), trace.times, trace.s_factors)
        for trace in traces
    )
    assert first == pytest.approx(shifted, abs=1e-4)


def test_rydberg_population_stays_small():
    config = BlockadeConfig.with_automatic_step(
        4, TOY_LASERS, t_final=10 * TOY_PERIOD, record_interval=TOY_PERIOD
    )
    trace = evolve_blockade(config)
    assert trace.nr_means.max() < 0.05
    assert np.all(np.abs(trace.norms - 1) < 1e-6)
    assert trace.metadata["phase_convention"] == "++"
    assert len(trace.metadata["lasers"]) == 6


def test_initial_state_must_match_basis():
    config = BlockadeConfig.with_automatic_step(3, TOY_LASERS, t_final=TOY_PERIOD)
    with pytest.raises(InvalidStateError):
        evolve_blockade(config, initial=DickeState.all_in_a(build_basis(3, 0)))


def test_phase_slope_of_pure_tone():
    times = np.linspace(0, 10, 2001)
    signal = np.exp(-1j * 0.7 * times) * (1 + 0.01 * np.exp(-1j * 30 * times))
    assert filtered_phase_slope(times, signal, window=50)[0] == pytest.approx(-0.7, rel=1e-4)
    with pytest.raises(ValueError):
        filtered_phase_slope(times[:50], signal[:50], window=50)


def test_blockaded_light_shift():
    omega, delta = 0.1, 1.0
    trace = single_laser_run(4, omega, delta)
    expected = blockaded_shift(trace.n_a, omega, delta)
    assert trace.shifts == pytest.approx(expected, abs=1e-5)
    assert trace.quadratic_coefficient() == pytest.approx(omega**4 / delta**3, rel=0.05)
    assert not trace.non_perturbative


def test_light_shift_without_blockade_is_nearly_linear():
    omega, delta = 0.1, 1.0
    blockaded = single_laser_run(4, omega, delta).quadratic_coefficient()
    free = single_laser_run(4, omega, delta, blockade=False).quadratic_coefficient()
    assert abs(free) < 0.2 * abs(blockaded)


def test_strong_laser_warns(caplog):
    with caplog.at_level(logging.WARNING):
        trace = single_laser_run(2, 0.3, 1.0, t_final=200.0)
    assert trace.non_perturbative
    assert "not perturbative" in caplog.text


def test_single_laser_set_is_static():
    hamiltonian = build_time_dependent_hamiltonian(build_basis(2, 1), single_laser_set(0.1, 1.0))
    assert hamiltonian.is_static
    assert hamiltonian.base_frequency() is None


def test_mirror_fields_flatten_the_sector_light_shifts():
    three = standard_six_laser_set(10.0, 4.0, 0.5, 0.5, 0.5, include_mirror=False)
    reference = sector_light_shifts(4, three, t_final=20 * TOY_PERIOD)
    mirrored = sector_light_shifts(4, TOY_LASERS, t_final=20 * TOY_PERIOD)
    assert reference.spread() > 0.02
    assert mirrored.spread() < 0.1 * reference.spread()


def squeezing_point_lasers():
    """N = 20 operating point: 50 and 20 MHz detunings, 1.1 MHz matrix elements."""
    omega = 2 * np.pi * 1.1
    return standard_six_laser_set(
        2 * np.pi * 50, 2 * np.pi * 20, omega, omega, omega, phase_convention="++"
    )


def test_early_squeezing_at_the_operating_point():
    lasers = squeezing_point_lasers()
    config = BlockadeConfig.with_automatic_step(20, lasers, t_final=20.0, record_interval=1.0)
    trace = evolve_blockade(config)
    omega_eff = -perturbative_pair_coupling(lasers).real / 2
    assert omega_eff > 0
    reference = IdealPrediction(20, omega_eff).s_analytic(trace.times)
    assert trace.s_factors[-1] > 1.3
    assert np.all(np.abs(trace.s_factors / reference - 1) < 0.15)
    # the whole run peaks near 0.08
    assert trace.nr_means.max() < 0.1
    assert np.all(np.abs(trace.norms - 1) < 1e-6)


def test_step_halving_at_the_operating_point():
    lasers = squeezing_point_lasers()
    coarse = BlockadeConfig.with_automatic_step(20, lasers, t_final=20.0, record_interval=1.0)
    fine = BlockadeConfig(
        20, lasers, t_final=20.0, dt=coarse.dt / 2, record_every=2 * coarse.record_every
    )
    s_coarse, s_fine = (evolve_blockade(config).s_factors[-1] for config in (coarse, fine))
    assert s_fine == pytest.approx(s_coarse, rel=0.005)
