"""Symmetric (Dicke) states of N three-level atoms and collective spin metrics.

Atoms have two ground levels ``a`` and ``b`` and a Rydberg level ``r``. A
symmetric state is labelled by the occupations ``(n_a, n_r)``, the remaining
``n_b = N - n_a - n_r`` atoms being in ``b``. The collective spin is built from
the Schwinger representation of the a/b pair::

    J_x = (a†b + b†a) / 2,   J_y = (a†b - b†a) / 2i,   J_z = (n_a - n_b) / 2

so that ``n_a = J_z + N/2`` on the ground manifold and a coherent state has
variance N/4 along any transverse axis.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sparse
from scipy import special

from .errors import InvalidStateError

NORM_TOLERANCE = 1e-9
HARD_NORM_TOLERANCE = 1e-6
SQUEEZING_AXIS = -np.pi / 4
MAX_SUPPORTED_RYDBERG = 2

_LEVELS = ("a", "b", "r")


@dataclass(frozen=True)
class DickeBasis:
    """Symmetric configurations ``(n_a, n_r)`` with at most ``max_rydberg``
    Rydberg excitations.

    Attributes
    ----------
    n_atoms: int
        Number of atoms N.
    max_rydberg: int
        Truncation of the Rydberg occupation. 1 is the blockade truncation,
        0 keeps the ground manifold only, 2 is used for light-shift runs
        without blockade.
    configurations: list of (n_a, n_r)
        Ordered n_r-major, n_a ascending.
    index_map: dict
        Inverse of ``configurations``.
    """

    n_atoms: int
    max_rydberg: int = 1
    configurations: List[Tuple[int, int]] = field(
        init=False, repr=False, compare=False, hash=False
    )
    index_map: Dict[Tuple[int, int], int] = field(
        init=False, repr=False, compare=False, hash=False
    )

    def __post_init__(self):
        self.validate()
        configurations = [
            (n_a, n_r)
            for n_r in range(min(self.max_rydberg, self.n_atoms) + 1)
            for n_a in range(self.n_atoms - n_r + 1)
        ]
        object.__setattr__(self, "configurations", configurations)
        object.__setattr__(
            self, "index_map", {conf: i for i, conf in enumerate(configurations)}
        )

    def validate(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if self.max_rydberg not in range(MAX_SUPPORTED_RYDBERG + 1):
            raise ValueError(
                f"max_rydberg must be in 0..{MAX_SUPPORTED_RYDBERG}, got {self.max_rydberg}"
            )

    @property
    def dimension(self) -> int:
        return len(self.configurations)

    def index(self, n_a: int, n_r: int = 0) -> int:
        return self.index_map[(n_a, n_r)]

    @property
    def n_a(self) -> np.ndarray:
        return np.array([n_a for n_a, _ in self.configurations], dtype=float)

    @property
    def n_r(self) -> np.ndarray:
        return np.array([n_r for _, n_r in self.configurations], dtype=float)

    @property
    def n_b(self) -> np.ndarray:
        return self.n_atoms - self.n_a - self.n_r

    def sector(self, n_r: int) -> slice:
        """Slice of the flat index holding the configurations with ``n_r``."""
        start = self.index(0, n_r)
        return slice(start, start + self.n_atoms - n_r + 1)


def build_basis(n_atoms: int, max_rydberg: int = 1) -> DickeBasis:
    """Return the symmetric basis of ``n_atoms`` atoms truncated at
    ``max_rydberg`` Rydberg excitations."""
    return DickeBasis(n_atoms=n_atoms, max_rydberg=max_rydberg)


def _parse_ladder(which: str) -> Tuple[str, str]:
    letters = which.replace("†", "").replace("^", "").replace(" ", "")
    if len(letters) != 2 or any(letter not in _LEVELS for letter in letters):
        raise ValueError(f"Unknown ladder operator {which!r}, expected e.g. 'a†b'")
    return letters[0], letters[1]


@lru_cache(maxsize=256)
def _ladder_matrix(basis: DickeBasis, create: str, annihilate: str) -> sparse.csr_matrix:
    rows, cols, values = [], [], []
    for col, (n_a, n_r) in enumerate(basis.configurations):
        occupation = {"a": n_a, "b": basis.n_atoms - n_a - n_r, "r": n_r}
        weight = occupation[annihilate]
        if weight == 0:
            continue
        occupation[annihilate] -= 1
        occupation[create] += 1
        weight *= occupation[create]
        row = basis.index_map.get((occupation["a"], occupation["r"]))
        if row is None:
            # above the Rydberg truncation
            continue
        rows.append(row)
        cols.append(col)
        values.append(np.sqrt(weight))
    shape = (basis.dimension, basis.dimension)
    return sparse.csr_matrix((values, (rows, cols)), shape=shape, dtype=complex)


def ladder_action(basis: DickeBasis, which: str) -> sparse.csr_matrix:
    """Collective operator ``x†y`` on the symmetric basis.

    Parameters
    ----------
    basis : DickeBasis
        The basis the operator acts on.
    which : str
        One of ``"a†b", "b†a", "a†r", "r†a", "b†r", "r†b"`` (``"ab"`` or
        ``"a^b"`` are accepted too). ``x†x`` gives the occupation of ``x``.

    Returns
    -------
    scipy.sparse.csr_matrix
        Matrix with the bosonic factors of the Schwinger representation, e.g.
        ``a†b |n_a, n_r> = sqrt((n_a + 1) n_b) |n_a + 1, n_r>``. Transitions
        leaving the truncated basis are dropped.
    """
    create, annihilate = _parse_ladder(which)
    return _ladder_matrix(basis, create, annihilate)


def spin_operator(basis: DickeBasis, theta: float) -> sparse.csr_matrix:
    """Return ``J_theta = (e^{i theta} a†b + e^{-i theta} b†a) / 2``."""
    raising = ladder_action(basis, "a†b")
    return ((np.exp(1j * theta) * raising + np.exp(-1j * theta) * raising.getH()) / 2).tocsr()


@lru_cache(maxsize=64)
def spin_components(
    basis: DickeBasis,
) -> Tuple[sparse.csr_matrix, sparse.csr_matrix, sparse.csr_matrix]:
    """Return ``(J_x, J_y, J_z)`` on ``basis``."""
    raising = ladder_action(basis, "a†b")
    lowering = raising.getH()
    j_x = ((raising + lowering) / 2).tocsr()
    j_y = ((raising - lowering) / 2j).tocsr()
    j_z = sparse.diags((basis.n_a - basis.n_b) / 2, format="csr", dtype=complex)
    return j_x, j_y, j_z


@dataclass
class DickeState:
    """Pure symmetric state: one complex amplitude per basis configuration.

    The amplitudes are the only mutable part; the squared norm is checked
    against ``norm_tolerance`` on construction.
    """

    basis: DickeBasis
    amplitudes: np.ndarray
    norm_tolerance: float = NORM_TOLERANCE

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        self.validate()

    def validate(self):
        if self.amplitudes.shape != (self.basis.dimension,):
            raise InvalidStateError(
                f"Expected {self.basis.dimension} amplitudes, got shape {self.amplitudes.shape}"
            )
        deviation = self.norm_deviation
        if deviation > self.norm_tolerance:
            raise InvalidStateError(
                f"State norm deviates from 1 by {deviation:.3e} "
                f"(tolerance {self.norm_tolerance:.1e})"
            )

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    @property
    def norm_deviation(self) -> float:
        return abs(self.norm - 1)

    @classmethod
    def from_configuration(cls, basis: DickeBasis, n_a: int, n_r: int = 0) -> "DickeState":
        amplitudes = np.zeros(basis.dimension, dtype=complex)
        amplitudes[basis.index(n_a, n_r)] = 1
        return cls(basis, amplitudes)

    @classmethod
    def all_in_a(cls, basis: DickeBasis) -> "DickeState":
        return cls.from_configuration(basis, basis.n_atoms)

    @classmethod
    def all_in_b(cls, basis: DickeBasis) -> "DickeState":
        return cls.from_configuration(basis, 0)

    @classmethod
    def normalized(cls, basis: DickeBasis, amplitudes) -> "DickeState":
        amplitudes = np.asarray(amplitudes, dtype=complex)
        return cls(basis, amplitudes / np.linalg.norm(amplitudes))

    def population(self, n_r: int) -> float:
        """Total weight of the sector with ``n_r`` Rydberg excitations."""
        return float(np.sum(np.abs(self.amplitudes[self.basis.sector(n_r)]) ** 2))


def coherent_state(basis: DickeBasis, polar: float, azimuth: float = 0.0) -> DickeState:
    """Product state of N atoms each in ``cos(polar/2)|a> + e^{i azimuth} sin(polar/2)|b>``.

    ``polar = 0`` is all atoms in ``a`` (mean spin along +z); in general the
    mean spin is ``(N/2) (sin polar cos azimuth, sin polar sin azimuth, cos polar)``.
    """
    n_atoms = basis.n_atoms
    n_a = np.arange(n_atoms + 1)
    n_b = n_atoms - n_a
    magnitudes = (
        np.sqrt(special.comb(n_atoms, n_a))
        * np.cos(polar / 2) ** n_a
        * np.sin(polar / 2) ** n_b
    )
    amplitudes = np.zeros(basis.dimension, dtype=complex)
    amplitudes[basis.sector(0)] = magnitudes * np.exp(1j * azimuth * n_b)
    return DickeState.normalized(basis, amplitudes)


@dataclass
class SpinObservables:
    """Expectation values of the collective spin in one state.

    Attributes
    ----------
    n_atoms: int
        N, used for the coherent-state reference N/4.
    mean_spin: np.ndarray
        (<J_x>, <J_y>, <J_z>).
    second_moments: np.ndarray
        2x2 matrix of <J_x^2>, <(J_x J_y + J_y J_x)/2>, <J_y^2>.
    rydberg_population: float
        Mean number of Rydberg excitations <n_r>.
    n_b_mean: float
        Mean number of atoms in b.
    moment_matrix: np.ndarray
        3x3 matrix of the symmetrized <(J_i J_j + J_j J_i)/2>, i, j in x, y, z.
    """

    n_atoms: int
    mean_spin: np.ndarray
    second_moments: np.ndarray
    rydberg_population: float
    n_b_mean: float
    moment_matrix: Optional[np.ndarray] = None

    def _axis(self, theta: float) -> np.ndarray:
        # J_theta = cos(theta) J_x - sin(theta) J_y
        return np.array([np.cos(theta), -np.sin(theta)])

    def second_moment_at(self, theta: float) -> float:
        """<J_theta^2>, the quantity the loss formulas are written for."""
        axis = self._axis(theta)
        return float(axis @ self.second_moments @ axis)

    def variance_at(self, theta: float) -> float:
        mean = float(self._axis(theta) @ self.mean_spin[:2])
        return max(self.second_moment_at(theta) - mean**2, 0.0)

    def covariance(self) -> np.ndarray:
        """Transverse covariance matrix of (J_x, J_y)."""
        transverse = self.mean_spin[:2]
        return self.second_moments - np.outer(transverse, transverse)

    def orthogonal_variance_min(self) -> float:
        """Smallest variance of a spin component orthogonal to the mean spin.

        Falls back to the transverse (x, y) plane when the mean spin vanishes
        or the full moment matrix is unknown.
        """
        length = np.linalg.norm(self.mean_spin)
        if self.moment_matrix is None or length < 1e-12:
            return minimal_variance(self)[1]
        direction = self.mean_spin / length
        covariance = self.moment_matrix - np.outer(self.mean_spin, self.mean_spin)
        helper = np.eye(3)[np.argmin(np.abs(direction))]
        first = np.cross(direction, helper)
        first /= np.linalg.norm(first)
        plane = np.array([first, np.cross(direction, first)])
        return max(float(np.linalg.eigvalsh(plane @ covariance @ plane.T)[0]), 0.0)


def observables(state: DickeState) -> SpinObservables:
    """Compute the collective spin moments and populations of ``state``."""
    if state.norm_deviation > HARD_NORM_TOLERANCE:
        raise InvalidStateError(
            f"Observables need a normalized state, norm deviation is {state.norm_deviation:.3e}"
        )
    basis, psi = state.basis, state.amplitudes
    j_x, j_y, j_z = spin_components(basis)
    x_psi, y_psi, z_psi = j_x @ psi, j_y @ psi, j_z @ psi
    populations = np.abs(psi) ** 2
    mean_spin = np.array(
        [
            np.vdot(psi, x_psi).real,
            np.vdot(psi, y_psi).real,
            np.vdot(psi, z_psi).real,
        ]
    )
    components = (x_psi, y_psi, z_psi)
    moment_matrix = np.array(
        [[np.vdot(left, right).real for right in components] for left in components]
    )
    return SpinObservables(
        n_atoms=basis.n_atoms,
        mean_spin=mean_spin,
        second_moments=moment_matrix[:2, :2].copy(),
        rydberg_population=float(populations @ basis.n_r),
        n_b_mean=float(populations @ basis.n_b),
        moment_matrix=moment_matrix,
    )


@dataclass
class SqueezingMetrics:
    """Squeezing of a state.

    Attributes
    ----------
    s_factor: float
        S = (N/4) / variance at the fixed axis theta = -pi/4 (``inf`` when
        that variance vanishes, see ``infinite``).
    theta_min: float
        Axis in [0, pi) of minimal transverse variance.
    variance_min: float
        The minimal variance.
    variance_fixed: float
        The variance at theta = -pi/4.
    s_optimal: float
        (N/4) divided by the smallest variance orthogonal to the mean spin,
        the squeezing on the best axis whatever the spin direction.
    infinite: bool
        Set when the fixed-axis variance is zero.
    """

    s_factor: float
    theta_min: float
    variance_min: float
    variance_fixed: float
    s_optimal: float
    infinite: bool = False


def minimal_variance(spin: SpinObservables) -> Tuple[float, float]:
    """Return ``(theta_min, variance_min)`` in closed form.

    variance(theta) = M + A cos(2 theta) + B sin(2 theta) with
    M = (Vxx + Vyy)/2, A = (Vxx - Vyy)/2 and B = -Cxy.
    """
    covariance = spin.covariance()
    mean_variance = (covariance[0, 0] + covariance[1, 1]) / 2
    a_term = (covariance[0, 0] - covariance[1, 1]) / 2
    b_term = -covariance[0, 1]
    amplitude = np.hypot(a_term, b_term)
    theta_min = float(np.mod((np.arctan2(b_term, a_term) + np.pi) / 2, np.pi))
    return theta_min, max(float(mean_variance - amplitude), 0.0)


def squeezing(state: DickeState) -> SqueezingMetrics:
    """Squeezing factor of ``state`` along -pi/4 and on the optimal axis."""
    return squeezing_from_observables(observables(state))


def squeezing_from_observables(spin: SpinObservables) -> SqueezingMetrics:
    theta_min, variance_min = minimal_variance(spin)
    variance_fixed = spin.variance_at(SQUEEZING_AXIS)
    reference = spin.n_atoms / 4
    variance_min = min(variance_min, variance_fixed)
    orthogonal_min = spin.orthogonal_variance_min()
    infinite = variance_fixed <= 0
    return SqueezingMetrics(
        s_factor=np.inf if infinite else reference / variance_fixed,
        theta_min=theta_min,
        variance_min=variance_min,
        variance_fixed=variance_fixed,
        s_optimal=np.inf if orthogonal_min <= 0 else reference / orthogonal_min,
        infinite=infinite,
    )
