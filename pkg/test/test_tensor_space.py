import numpy as np
import pytest

from rydberg_squeezing import tensor_space
from rydberg_squeezing.spin_core import build_basis, ladder_action, spin_components


def test_size_limits():
    with pytest.raises(ValueError):
        tensor_space.collective_transition("r†a", 9)
    with pytest.raises(ValueError):
        tensor_space.spin_components(3, local_dim=4)


def test_product_state_and_counts():
    state = tensor_space.product_state("abr")
    assert state.shape == (27,)
    assert list(np.flatnonzero(state)) == [0 * 9 + 1 * 3 + 2]
    assert list(tensor_space.rydberg_counts(1)) == [0, 0, 1]


def test_rydberg_interaction_only_shifts_doubly_excited_states():
    diagonal = tensor_space.rydberg_interaction(2, 5.0).diagonal()
    assert diagonal[8] == 5.0
    assert np.count_nonzero(diagonal) == 1


@pytest.mark.parametrize("n_atoms, max_rydberg, local_dim", [(3, 0, 2), (3, 1, 3), (4, 2, 3)])
def test_embedding_is_an_isometry(n_atoms, max_rydberg, local_dim):
    basis = build_basis(n_atoms, max_rydberg)
    embedding = tensor_space.symmetric_embedding(basis, local_dim).toarray()
    assert embedding.conj().T @ embedding == pytest.approx(np.eye(basis.dimension))


def test_embedding_rejects_rydberg_basis_for_two_levels():
    with pytest.raises(ValueError):
        tensor_space.symmetric_embedding(build_basis(3, 1), local_dim=2)


@pytest.mark.parametrize("which", ["r†a", "r†b", "a†b"])
def test_collective_ladders_restrict_to_symmetric_ones(which):
    basis = build_basis(3, 1)
    embedding = tensor_space.symmetric_embedding(basis, 3)
    product_ladder = tensor_space.collective_transition(which, 3)
    restricted = (embedding.getH() @ product_ladder @ embedding).toarray()
    assert restricted == pytest.approx(ladder_action(basis, which).toarray())


def test_spin_components_restrict_to_symmetric_ones():
    basis = build_basis(4, 0)
    embedding = tensor_space.symmetric_embedding(basis, 2)
    for product_op, symmetric_op in zip(
        tensor_space.spin_components(4), spin_components(basis)
    ):
        restricted = (embedding.getH() @ product_op @ embedding).toarray()
        assert restricted == pytest.approx(symmetric_op.toarray())


def test_reduced_density_matrix():
    psi = tensor_space.product_state("ab", local_dim=2)
    rho = tensor_space.reduced_density_matrix(psi, 2, traced_site=0)
    assert rho == pytest.approx(np.diag([0, 1]))
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    for site in range(3):
        rho = tensor_space.reduced_density_matrix(psi, 3, traced_site=site)
        assert np.trace(rho) == pytest.approx(1)
        assert rho == pytest.approx(rho.conj().T)


def test_expectation():
    j_z = tensor_space.spin_components(2)[2]
    rho = np.diag([1.0, 0, 0, 0])
    assert tensor_space.expectation(j_z, rho) == pytest.approx(1.0)
