import numpy as np
import pytest

from rydberg_squeezing.errors import InvalidStateError, StepSizeError
from rydberg_squeezing.ideal_model import (
    IdealConfig,
    IdealPrediction,
    analytic_curves,
    build_ideal_hamiltonian,
    energy,
    evolve_ideal,
    evolve_one_axis,
)
from rydberg_squeezing.integrators import exact_propagator
from rydberg_squeezing.spin_core import DickeState, build_basis
from rydberg_squeezing.tensor_space import (
    pairwise_squeezing_hamiltonian,
    symmetric_embedding,
)


def run_to_exponent(n_atoms, exponent, n_steps=400):
    """Ideal run with omega_eff = 1 until 4 N omega_eff t = exponent."""
    t_final = exponent / (4 * n_atoms)
    return evolve_ideal(IdealConfig(n_atoms, 1.0, t_final, n_steps))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_atoms=0, omega_eff=1.0, t_final=1.0, n_steps=10),
        dict(n_atoms=2.5, omega_eff=1.0, t_final=1.0, n_steps=10),
        dict(n_atoms=4, omega_eff=np.inf, t_final=1.0, n_steps=10),
        dict(n_atoms=4, omega_eff=1.0, t_final=0.0, n_steps=10),
        dict(n_atoms=4, omega_eff=1.0, t_final=1.0, n_steps=0),
    ],
)
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        IdealConfig(**kwargs)


def test_analytic_curves():
    prediction = analytic_curves(IdealConfig(20, 0.5, 1.0, 10))
    assert prediction.s_analytic(0) == 1
    assert prediction.nb_analytic(0) == 0
    t = np.linspace(0, 0.1, 5)
    assert np.all(np.diff(prediction.s_analytic(t)) > 0)
    assert prediction.s_analytic(0.1) == pytest.approx(np.exp(4))
    assert prediction.nb_analytic(0.1) == pytest.approx(np.sinh(2) ** 2)
    # S ~ 4 n_b once many pairs are transferred
    late = prediction.s_analytic(0.3) / prediction.nb_analytic(0.3)
    assert late == pytest.approx(4, rel=1e-4)


def test_time_to_reach():
    prediction = IdealPrediction(n_atoms=10, omega_eff=2.0)
    t = prediction.time_to_reach(5.0)
    assert prediction.s_analytic(t) == pytest.approx(5.0)
    assert IdealPrediction(10, 0.0).time_to_reach(5.0) == np.inf
    with pytest.raises(ValueError):
        prediction.time_to_reach(0.5)


def test_hamiltonian_requires_ground_manifold():
    with pytest.raises(ValueError):
        build_ideal_hamiltonian(build_basis(4, 1), 1.0)
    hamiltonian = build_ideal_hamiltonian(build_basis(6, 0), 0.7).toarray()
    assert np.allclose(hamiltonian, hamiltonian.conj().T)


def test_initial_squeezing_rate():
    # dS/dt = 4 omega_eff (N - 1) at t = 0
    n_atoms, exponent = 20, 0.004
    trace = run_to_exponent(n_atoms, exponent, n_steps=10)
    s_final = trace.s_factors[-1]
    assert s_final - 1 == pytest.approx(exponent * (n_atoms - 1) / n_atoms, rel=0.02)
    nb_ratio = trace.nb_means[-1] / np.sinh(exponent / 2) ** 2
    assert nb_ratio == pytest.approx((n_atoms - 1) / n_atoms, rel=0.01)


@pytest.mark.parametrize("n_atoms", [10, 20, 50])
def test_agreement_with_analytic_growth(n_atoms):
    trace = run_to_exponent(n_atoms, 0.3)
    prediction = IdealPrediction(n_atoms, 1.0)
    s_analytic = prediction.s_analytic(trace.times)
    assert np.all(np.abs(trace.s_factors / s_analytic - 1) < 0.05)
    assert trace.s_factors[0] == pytest.approx(1)
    assert np.all(np.diff(trace.s_factors) > 0)


@pytest.mark.parametrize("n_atoms", [10, 20, 50])
def test_deviation_over_the_analytic_window(n_atoms):
    # the analytic n_b reaches 0.05 N at 2 N t = asinh(sqrt(0.05 N))
    t_edge = np.arcsinh(np.sqrt(0.05 * n_atoms)) / (2 * n_atoms)
    config = IdealConfig.with_automatic_steps(n_atoms, 1.0, 1.2 * t_edge)
    trace = evolve_ideal(config)
    inside = trace.nb_means < 0.05 * n_atoms
    assert trace.times[inside][-1] > t_edge
    ratio = trace.s_factors[inside] / IdealPrediction(n_atoms, 1.0).s_analytic(trace.times[inside])
    assert np.all(ratio <= 1 + 1e-6)
    # pair depletion at n_b = 0.05 N keeps the edge deviation near 11-13% for every N
    assert 0.05 < np.max(1 - ratio) < 0.15


def test_maximal_squeezing_approaches_half_the_atom_number():
    ratios = []
    for n_atoms in (10, 20, 50):
        t_final = np.log(4 * n_atoms) / (2 * n_atoms)
        config = IdealConfig.with_automatic_steps(n_atoms, 1.0, t_final)
        s_max, t_max = evolve_ideal(config).max_squeezing()
        assert 0 < t_max <= t_final
        ratios.append(s_max / (n_atoms / 2))
    # about 1.45, 1.28 and 1.17
    assert np.all(np.diff(ratios) < 0)
    assert 1 < ratios[-1] < 1.25
    assert ratios[0] < 1.6


def test_energy_and_parity_are_conserved():
    n_atoms = 12
    config = IdealConfig.with_automatic_steps(n_atoms, 1.0, 0.1)
    trace = evolve_ideal(config)
    basis = config.basis
    hamiltonian = build_ideal_hamiltonian(basis, 1.0)
    assert energy(hamiltonian, trace.final_state) == pytest.approx(0, abs=1e-3)
    odd = basis.n_b % 2 == 1
    assert np.all(trace.final_state.amplitudes[odd] == 0)
    assert np.all(np.abs(trace.norms - 1) < 1e-6)
    assert trace.metadata["model"] == "ideal"


def test_negative_coupling_anti_squeezes():
    trace = evolve_ideal(IdealConfig(10, -1.0, 0.01, 50))
    assert trace.s_factors[-1] < 1


def test_coarse_step_is_rejected():
    with pytest.raises(StepSizeError):
        evolve_ideal(IdealConfig(20, 1.0, 1.0, 10))


def test_initial_state_must_match_basis():
    with pytest.raises(InvalidStateError):
        evolve_ideal(IdealConfig(4, 1.0, 0.1, 100), initial=DickeState.all_in_a(build_basis(5, 0)))


def test_agreement_with_pairwise_product_space_evolution():
    n_atoms, omega_eff, t_final = 4, 1.0, 0.2
    trace = evolve_ideal(IdealConfig(n_atoms, omega_eff, t_final, 2000))
    embedding = symmetric_embedding(trace.final_state.basis, local_dim=2)
    hamiltonian = pairwise_squeezing_hamiltonian(n_atoms, omega_eff)
    initial = embedding @ DickeState.all_in_a(trace.final_state.basis).amplitudes
    expected = exact_propagator(hamiltonian, t_final) @ initial
    assert np.abs(embedding @ trace.final_state.amplitudes - expected).max() < 1e-8


def test_one_axis_twisting_squeezes_the_optimal_axis():
    trace = evolve_one_axis(n_atoms=20, chi=1.0, t_final=0.1, n_steps=200)
    first, last = trace.samples[0], trace.samples[-1]
    assert first.s_optimal == pytest.approx(1)
    assert max(sample.s_optimal for sample in trace.samples) > 2
    assert last.mean_spin[1] == pytest.approx(0, abs=1e-8)
    assert trace.metadata["model"] == "one_axis"
