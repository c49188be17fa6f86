"""Brute-force constructions in the full product space of N atoms.

Each atom has ``local_dim`` levels: ``a, b`` (2) or ``a, b, r`` (3). Atom 0 is
the leftmost tensor factor. These operators are exponentially large and only
meant for the small-N cross-checks of the symmetric machinery.
"""

from functools import reduce
from itertools import product
from typing import Sequence, Tuple

import numpy as np
import scipy.sparse as sparse
from scipy import special

from .spin_core import DickeBasis

LEVEL_INDEX = {"a": 0, "b": 1, "r": 2}
MAX_PRODUCT_DIMENSION = 3**8


def _check_size(n_atoms: int, local_dim: int):
    if local_dim not in (2, 3):
        raise ValueError(f"local_dim must be 2 or 3, got {local_dim}")
    if n_atoms < 1 or local_dim**n_atoms > MAX_PRODUCT_DIMENSION:
        raise ValueError(
            f"Product space of {n_atoms} atoms with {local_dim} levels is out of range"
        )


def transition(upper: str, lower: str, local_dim: int = 3) -> sparse.csr_matrix:
    """Single-atom ``|upper><lower|``."""
    matrix = sparse.lil_matrix((local_dim, local_dim), dtype=complex)
    matrix[LEVEL_INDEX[upper], LEVEL_INDEX[lower]] = 1
    return matrix.tocsr()


def site_operator(
    operator: sparse.spmatrix, site: int, n_atoms: int, local_dim: int = 3
) -> sparse.csr_matrix:
    """``operator`` acting on atom ``site``, identity elsewhere."""
    _check_size(n_atoms, local_dim)
    identity = sparse.identity(local_dim, dtype=complex, format="csr")
    factors = [operator if k == site else identity for k in range(n_atoms)]
    return reduce(lambda left, right: sparse.kron(left, right, format="csr"), factors)


def collective_operator(
    operator: sparse.spmatrix, n_atoms: int, local_dim: int = 3
) -> sparse.csr_matrix:
    """Sum over atoms of the single-atom ``operator``."""
    return sum(
        site_operator(operator, site, n_atoms, local_dim) for site in range(n_atoms)
    ).tocsr()


def collective_transition(
    which: str, n_atoms: int, local_dim: int = 3
) -> sparse.csr_matrix:
    """``sum_i |x><y|_i`` for ``which = "x†y"``, the product-space ladder operator."""
    letters = which.replace("†", "").replace("^", "")
    return collective_operator(transition(letters[0], letters[1], local_dim), n_atoms, local_dim)


def spin_components(n_atoms: int, local_dim: int = 2) -> Tuple[sparse.csr_matrix, ...]:
    """``(J_x, J_y, J_z)`` as sums of single-atom spin-1/2 operators on a/b."""
    raising = collective_transition("a†b", n_atoms, local_dim)
    lowering = raising.getH()
    j_z = collective_operator(
        (transition("a", "a", local_dim) - transition("b", "b", local_dim)) / 2,
        n_atoms,
        local_dim,
    )
    return ((raising + lowering) / 2).tocsr(), ((raising - lowering) / 2j).tocsr(), j_z


def rydberg_interaction(n_atoms: int, u_int: float) -> sparse.csr_matrix:
    """``u_int sum_{i<j} n_r^i n_r^j`` (diagonal, three levels per atom)."""
    diagonal = np.array(
        [
            u_int * special.comb(levels.count(2), 2)
            for levels in product(range(3), repeat=n_atoms)
        ]
    )
    return sparse.diags(diagonal, format="csr", dtype=complex)


def rydberg_counts(n_atoms: int) -> np.ndarray:
    """Number of Rydberg atoms in each product basis state."""
    return np.array([levels.count(2) for levels in product(range(3), repeat=n_atoms)])


def product_state(levels: Sequence[str], local_dim: int = 3) -> np.ndarray:
    """Basis vector of the product state, e.g. ``"aab"``."""
    _check_size(len(levels), local_dim)
    index = 0
    for level in levels:
        index = index * local_dim + LEVEL_INDEX[level]
    vector = np.zeros(local_dim ** len(levels), dtype=complex)
    vector[index] = 1
    return vector


def symmetric_embedding(basis: DickeBasis, local_dim: int = 3) -> sparse.csr_matrix:
    """Isometry mapping symmetric amplitudes to the product space.

    The column of configuration ``(n_a, n_r)`` is the normalized sum of all
    product states with those occupations.
    """
    n_atoms = basis.n_atoms
    _check_size(n_atoms, local_dim)
    if local_dim == 2 and basis.max_rydberg > 0:
        raise ValueError("Two-level atoms only embed the ground manifold (max_rydberg=0)")
    rows, cols, members = [], [], {}
    for row, levels in enumerate(product(range(local_dim), repeat=n_atoms)):
        configuration = (levels.count(0), levels.count(2))
        column = basis.index_map.get(configuration)
        if column is None:
            continue
        rows.append(row)
        cols.append(column)
        members[column] = members.get(column, 0) + 1
    values = [1 / np.sqrt(members[column]) for column in cols]
    shape = (local_dim**n_atoms, basis.dimension)
    return sparse.csr_matrix((values, (rows, cols)), shape=shape, dtype=complex)


def pairwise_squeezing_hamiltonian(n_atoms: int, omega_eff: float) -> sparse.csr_matrix:
    """``omega_eff sum_{i != j} (s_i s_j + h.c.)`` with ``s = |a><b|``, two levels per atom."""
    raising = [site_operator(transition("a", "b", 2), i, n_atoms, 2) for i in range(n_atoms)]
    pairs = sum(
        raising[i] @ raising[j] for i in range(n_atoms) for j in range(n_atoms) if i != j
    )
    return (omega_eff * (pairs + pairs.getH())).tocsr()


def reduced_density_matrix(
    psi: np.ndarray, n_atoms: int, traced_site: int = 0, local_dim: int = 2
) -> np.ndarray:
    """Density matrix of the ``n_atoms - 1`` atoms left after tracing out one."""
    _check_size(n_atoms, local_dim)
    tensor = np.asarray(psi).reshape((local_dim,) * n_atoms)
    tensor = np.moveaxis(tensor, traced_site, 0).reshape(local_dim, -1)
    return tensor.T @ tensor.conj()


def expectation(operator: sparse.spmatrix, rho: np.ndarray) -> float:
    """``Tr(rho O)`` for a Hermitian operator."""
    return float(np.real(np.trace(operator @ rho)))
