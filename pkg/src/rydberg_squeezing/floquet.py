"""Exact treatment of time-periodic Hamiltonians in an extended (Floquet) space.

A Hamiltonian ``H(t) = sum_q H_q e^{i q w0 t}`` becomes the static matrix::

    H_F[(m, i), (n, j)] = (H_{m-n})_{ij} + m w0 delta_mn delta_ij

on pairs (Fourier index m, state i), with |m| truncated at ``n_harmonics``.
Starting from ``psi`` in the block m=0, the physical state at time t is the
sum of the blocks weighted by e^{i m w0 t}; at multiples of the period it is
the plain sum of the blocks.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse

from .errors import AmbiguousBranchError

# Quasi-energies closer than this, relative to the largest one, form one
# degenerate cluster.
DEGENERACY_TOLERANCE = 1e-9


def _dense(matrix) -> np.ndarray:
    if sparse.issparse(matrix):
        return matrix.toarray().astype(complex)
    return np.asarray(matrix, dtype=complex)


@dataclass
class FourierHamiltonian:
    """Fourier components ``H_q`` of a Hamiltonian of period ``2 pi / base_frequency``."""

    components: Dict[int, np.ndarray]
    base_frequency: float

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.base_frequency > 0:
            raise ValueError(f"base_frequency must be positive, got {self.base_frequency}")
        if 0 not in self.components:
            raise ValueError("The static component (harmonic 0) is missing")
        for harmonic, component in self.components.items():
            partner = self.components.get(-harmonic)
            if partner is None or not np.allclose(partner, component.conj().T, atol=1e-12):
                raise ValueError(f"Harmonics {harmonic} and {-harmonic} are not Hermitian partners")

    @property
    def dimension(self) -> int:
        return self.components[0].shape[0]

    @property
    def max_harmonic(self) -> int:
        return max(abs(q) for q in self.components)

    @classmethod
    def from_terms(
        cls,
        static,
        frequencies: Sequence[float],
        raising_terms: Sequence,
        base_frequency: float,
    ) -> "FourierHamiltonian":
        """Build from ``static + sum_k (K_k e^{i w_k t} + h.c.)``; every ``w_k``
        must be a multiple of ``base_frequency``."""
        components = {0: _dense(static)}
        for frequency, term in zip(frequencies, raising_terms):
            ratio = frequency / base_frequency
            harmonic = int(np.round(ratio))
            if abs(ratio - harmonic) > 1e-9 * max(1.0, abs(ratio)):
                raise ValueError(
                    f"Frequency {frequency} is not a multiple of {base_frequency}"
                )
            term = _dense(term)
            if harmonic == 0:
                components[0] = components[0] + term + term.conj().T
                continue
            for q, value in ((harmonic, term), (-harmonic, term.conj().T)):
                components[q] = components[q] + value if q in components else value
        return cls(components=components, base_frequency=base_frequency)

    def floquet_matrix(self, n_harmonics: int) -> np.ndarray:
        size = 2 * n_harmonics + 1
        dimension = self.dimension
        matrix = np.zeros((size * dimension, size * dimension), dtype=complex)
        for row, m in enumerate(range(-n_harmonics, n_harmonics + 1)):
            block_rows = slice(row * dimension, (row + 1) * dimension)
            for col, n in enumerate(range(-n_harmonics, n_harmonics + 1)):
                component = self.components.get(m - n)
                if component is not None:
                    matrix[block_rows, col * dimension : (col + 1) * dimension] = component
            matrix[block_rows, block_rows] += m * self.base_frequency * np.eye(dimension)
        return matrix

    def solve(self, n_harmonics: int = None) -> "FloquetSolution":
        """Diagonalize the extended Hamiltonian. By default the truncation
        keeps twice the largest harmonic, plus two."""
        if n_harmonics is None:
            n_harmonics = 2 * self.max_harmonic + 2
        energies, vectors = linalg.eigh(self.floquet_matrix(n_harmonics))
        return FloquetSolution(
            energies=energies,
            vectors=vectors,
            dimension=self.dimension,
            n_harmonics=n_harmonics,
            base_frequency=self.base_frequency,
        )


@dataclass
class FloquetSolution:
    """Eigen-decomposition of a truncated Floquet Hamiltonian."""

    energies: np.ndarray
    vectors: np.ndarray
    dimension: int
    n_harmonics: int
    base_frequency: float

    @property
    def period(self) -> float:
        return 2 * np.pi / self.base_frequency

    def central_rows(self, states: Sequence[int]) -> np.ndarray:
        """Extended indices of ``states`` in the block m=0."""
        return self.n_harmonics * self.dimension + np.asarray(states, dtype=int)

    def embed(self, psi: np.ndarray) -> np.ndarray:
        extended = np.zeros(self.vectors.shape[0], dtype=complex)
        extended[self.central_rows(np.arange(self.dimension))] = psi
        return extended

    def stroboscopic_states(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Physical states at ``times`` (multiples of the period), one row per time."""
        coefficients = self.vectors.conj().T @ self.embed(psi)
        phases = np.exp(-1j * np.outer(times, self.energies))
        extended = (phases * coefficients) @ self.vectors.T
        blocks = extended.reshape(len(times), 2 * self.n_harmonics + 1, self.dimension)
        return blocks.sum(axis=1)

    def weights_on(self, states: Sequence[int]) -> np.ndarray:
        """Weight of every eigenvector on the m=0 copies of ``states``."""
        rows = self.central_rows(states)
        return np.sum(np.abs(self.vectors[rows, :]) ** 2, axis=0)

    def degenerate_clusters(self, tolerance: float = DEGENERACY_TOLERANCE) -> List[np.ndarray]:
        """Groups of eigenvector indices whose quasi-energies coincide."""
        order = np.argsort(self.energies)
        sorted_energies = self.energies[order]
        scale = max(1.0, float(np.abs(self.energies).max()))
        breaks = np.flatnonzero(np.diff(sorted_energies) > tolerance * scale) + 1
        return np.split(order, breaks)

    def aligned(
        self, states: Sequence[int], tolerance: float = DEGENERACY_TOLERANCE
    ) -> "FloquetSolution":
        """Same spectrum, with each degenerate cluster rotated to diagonalize
        the projector onto the m=0 copies of ``states``.

        A diagonalizer returns an arbitrary basis of a degenerate eigenspace.
        After the rotation at most ``len(states)`` vectors of a cluster
        overlap the model space.
        """
        rows = self.central_rows(states)
        energies = self.energies.copy()
        vectors = self.vectors.copy()
        for cluster in self.degenerate_clusters(tolerance):
            if len(cluster) < 2:
                continue
            block = self.vectors[:, cluster]
            projected = block[rows, :]
            overlap = projected.conj().T @ projected
            if not np.any(np.abs(overlap) > 0):
                continue
            _, rotation = linalg.eigh(overlap)
            rotated = block @ rotation
            vectors[:, cluster] = rotated
            # energies agree within the tolerance; keep their expectation values
            energies[cluster] = np.real(
                np.einsum("ik,i,ik->k", rotation.conj(), self.energies[cluster], rotation)
            )
        return FloquetSolution(
            energies=energies,
            vectors=vectors,
            dimension=self.dimension,
            n_harmonics=self.n_harmonics,
            base_frequency=self.base_frequency,
        )

    def quasi_energy(self, state: int, min_weight: float = 0.5) -> Tuple[float, float]:
        """Quasi-energy of the eigenvector connected to ``state``, and its weight.

        Degenerate eigenvectors are first aligned on ``state``.

        Raises
        ------
        AmbiguousBranchError
            If no eigenvector carries more than ``min_weight`` of ``state``.
        """
        return self.aligned([state])._best_branch(state, min_weight)

    def _best_branch(self, state: int, min_weight: float) -> Tuple[float, float]:
        weights = self.weights_on([state])
        best = int(np.argmax(weights))
        if weights[best] <= min_weight:
            raise AmbiguousBranchError(
                f"No Floquet state carries more than {min_weight} of state {state} "
                f"(best weight {weights[best]:.3f})"
            )
        return float(self.energies[best]), float(weights[best])


def effective_hamiltonian(
    solution: FloquetSolution, states: Sequence[int], min_weight: float = 0.5
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact effective Hamiltonian of the model space spanned by ``states``.

    The eigenvectors with the largest weights on the model space are
    projected onto it and orthonormalized symmetrically (des Cloizeaux), so
    the result is Hermitian and its eigenvalues are the selected
    quasi-energies.

    Returns
    -------
    (h_eff, weights)
        The ``len(states)`` square effective Hamiltonian and the weights of
        the selected eigenvectors on the model space.
    """
    size = len(states)
    solution = solution.aligned(states)
    weights = solution.weights_on(states)
    selected = np.argsort(weights)[::-1][:size]
    if weights[selected].min() <= min_weight:
        raise AmbiguousBranchError(
            f"Model space is not well separated: weights {np.round(weights[selected], 3)}"
        )
    projections = solution.vectors[np.ix_(solution.central_rows(states), selected)]
    overlap = projections @ projections.conj().T
    eigenvalues, eigenvectors = linalg.eigh(overlap)
    inverse_root = eigenvectors @ np.diag(eigenvalues ** -0.5) @ eigenvectors.conj().T
    energies = np.diag(solution.energies[selected])
    h_eff = inverse_root @ projections @ energies @ projections.conj().T @ inverse_root
    return (h_eff + h_eff.conj().T) / 2, weights[selected]


def commensurate_base(frequencies: Sequence[float], max_harmonic: int = 64) -> Optional[float]:
    """Largest ``w0`` of which every frequency is an integer multiple, or None
    when the frequencies are not commensurate (up to ``max_harmonic``)."""
    magnitudes = np.array(sorted({abs(w) for w in frequencies if w != 0}))
    if magnitudes.size == 0:
        return None
    for divisor in range(1, max_harmonic + 1):
        base = magnitudes[0] / divisor
        ratios = magnitudes / base
        if np.allclose(ratios, np.round(ratios), rtol=0, atol=1e-9 * ratios.max()):
            return float(base)
    return None
