"""Evolution under the effective quadratic squeezing Hamiltonians.

The blockaded four-photon process transfers atoms from ``a`` to ``b`` in pairs::

    H = omega_eff ((a†b)^2 + (b†a)^2) = 2 omega_eff (J_x^2 - J_y^2)

which squeezes the spin along theta = -pi/4. The one-axis Hamiltonian
``chi J_z^2`` produced by the blockaded light shift is provided for comparison.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sparse

from .errors import InvalidStateError
from .evolution import EvolverBase, SqueezingTrace
from .integrators import (
    NormMonitor,
    check_step,
    operator_norm_bound,
    rk4_propagator,
    steps_for_duration,
)
from .spin_core import (
    DickeBasis,
    DickeState,
    build_basis,
    coherent_state,
    ladder_action,
    spin_components,
)

logger = logging.getLogger(__name__)


@dataclass
class IdealConfig:
    """Parameters of an ideal-model run.

    Attributes
    ----------
    n_atoms: int
        Number of atoms N.
    omega_eff: float
        Effective pair coupling (angular frequency, sign allowed).
    t_final: float
        Duration of the run, in the inverse unit of ``omega_eff``.
    n_steps: int
        Number of integration steps. A sample is recorded after each step.
    """

    n_atoms: int
    omega_eff: float
    t_final: float
    n_steps: int

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if not np.isfinite(self.omega_eff):
            raise ValueError(f"omega_eff must be finite, got {self.omega_eff}")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")

    @property
    def dt(self) -> float:
        return self.t_final / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0, self.t_final, self.n_steps + 1)

    @property
    def basis(self) -> DickeBasis:
        return build_basis(self.n_atoms, max_rydberg=0)

    @classmethod
    def with_automatic_steps(
        cls, n_atoms: int, omega_eff: float, t_final: float, max_phase: float = 0.05
    ) -> "IdealConfig":
        """Config with the fewest steps keeping ``|H| dt`` under ``max_phase``."""
        hamiltonian = build_ideal_hamiltonian(build_basis(n_atoms, 0), omega_eff)
        n_steps = steps_for_duration(operator_norm_bound(hamiltonian), t_final, max_phase)
        return cls(n_atoms=n_atoms, omega_eff=omega_eff, t_final=t_final, n_steps=n_steps)


@dataclass
class IdealPrediction:
    """Analytic squeezing and population growth at short times.

    ``s_analytic(t) = exp(4 N omega_eff t)`` and
    ``nb_analytic(t) = sinh^2(2 N omega_eff t)``, both valid while the number
    of transferred atoms stays small compared with N.
    """

    n_atoms: int
    omega_eff: float

    def rate(self) -> float:
        return 2 * self.n_atoms * self.omega_eff

    def s_analytic(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return np.exp(2 * self.rate() * np.asarray(t, dtype=float))

    def nb_analytic(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return np.sinh(self.rate() * np.asarray(t, dtype=float)) ** 2

    @staticmethod
    def squeezing_from_population(nb: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """S ~ 4 n_b, valid for 1 << n_b << N."""
        return 4 * np.asarray(nb, dtype=float)

    def time_to_reach(self, s_target: float) -> float:
        """Time at which ``s_analytic`` reaches ``s_target``."""
        if s_target < 1:
            raise ValueError(f"Target squeezing must be at least 1, got {s_target}")
        if self.omega_eff == 0:
            return np.inf
        return float(np.log(s_target) / (2 * abs(self.rate())))


def analytic_curves(config: IdealConfig) -> IdealPrediction:
    return IdealPrediction(n_atoms=config.n_atoms, omega_eff=config.omega_eff)


def build_ideal_hamiltonian(basis: DickeBasis, omega_eff: float) -> sparse.csr_matrix:
    """``omega_eff ((a†b)^2 + (b†a)^2)`` on the ground manifold.

    Raises
    ------
    ValueError
        If ``basis`` keeps Rydberg configurations.
    """
    if basis.max_rydberg != 0:
        raise ValueError(
            f"The ideal Hamiltonian acts on the ground manifold (max_rydberg=0), "
            f"got max_rydberg={basis.max_rydberg}"
        )
    pair_transfer = ladder_action(basis, "a†b") @ ladder_action(basis, "a†b")
    return (omega_eff * (pair_transfer + pair_transfer.getH())).tocsr()


def build_one_axis_hamiltonian(basis: DickeBasis, chi: float) -> sparse.csr_matrix:
    """``chi J_z^2`` on the ground manifold."""
    if basis.max_rydberg != 0:
        raise ValueError(
            f"The one-axis Hamiltonian acts on the ground manifold (max_rydberg=0), "
            f"got max_rydberg={basis.max_rydberg}"
        )
    j_z = spin_components(basis)[2]
    return (chi * (j_z @ j_z)).tocsr()


def energy(hamiltonian: sparse.spmatrix, state: DickeState) -> float:
    return float(np.vdot(state.amplitudes, hamiltonian @ state.amplitudes).real)


class StaticEvolver(EvolverBase):
    """RK4 evolution under a time-independent Hamiltonian.

    The RK4 step of a static Hamiltonian is a fixed matrix, computed once and
    applied ``n_steps`` times.
    """

    def __init__(
        self,
        basis: DickeBasis,
        hamiltonian: sparse.spmatrix,
        dt: float,
        n_steps: int,
        label: str = "ideal",
    ):
        check_step(operator_norm_bound(hamiltonian), dt)
        self.basis = basis
        self.hamiltonian = hamiltonian
        self.dt = dt
        self.n_steps = n_steps
        self.label = label
        self.monitor = NormMonitor(label=label)

    @property
    def n_records(self) -> int:
        return self.n_steps + 1

    def _iter_states(self, initial: DickeState) -> Iterator[Tuple[float, np.ndarray]]:
        propagator = rk4_propagator(self.hamiltonian, self.dt)
        psi = initial.amplitudes.copy()
        self.monitor.update(psi, 0.0)
        yield 0.0, psi
        for step in range(1, self.n_steps + 1):
            psi = propagator @ psi
            t = step * self.dt
            self.monitor.update(psi, t)
            yield t, psi


def _default_initial(basis: DickeBasis, initial: Optional[DickeState]) -> DickeState:
    if initial is None:
        return DickeState.all_in_a(basis)
    if initial.basis != basis:
        raise InvalidStateError(
            f"Initial state has dimension {initial.basis.dimension}, "
            f"expected {basis.dimension} for N={basis.n_atoms}"
        )
    return initial


def evolve_ideal(
    config: IdealConfig, initial: Optional[DickeState] = None, progress: bool = False
) -> SqueezingTrace:
    """Evolve under the pair-transfer Hamiltonian, all atoms in ``a`` by default.

    The trace holds ``n_steps + 1`` uniformly spaced samples, t=0 included.

    Raises
    ------
    StepSizeError
        If ``|H| dt`` exceeds 0.1 rad.
    IntegrationError
        If the norm drifts beyond the hard tolerance.
    """
    basis = config.basis
    initial = _default_initial(basis, initial)
    hamiltonian = build_ideal_hamiltonian(basis, config.omega_eff)
    evolver = StaticEvolver(basis, hamiltonian, config.dt, config.n_steps, label="ideal")
    logger.info(
        "Ideal evolution: N=%d, omega_eff=%g, %d steps of %g",
        config.n_atoms,
        config.omega_eff,
        config.n_steps,
        config.dt,
    )
    metadata = {
        "model": "ideal",
        "n_atoms": config.n_atoms,
        "omega_eff": config.omega_eff,
        "dt": config.dt,
    }
    trace = evolver.run(initial, progress=progress, metadata=metadata)
    trace.metadata["max_step_norm_drift"] = evolver.monitor.max_step_drift
    return trace


def evolve_one_axis(
    n_atoms: int,
    chi: float,
    t_final: float,
    n_steps: int,
    initial: Optional[DickeState] = None,
    progress: bool = False,
) -> SqueezingTrace:
    """Evolve under ``chi J_z^2``, from the coherent state along +x by default.

    The squeezed axis rotates during this evolution, so the relevant figure of
    merit is ``SqueezingSample.s_optimal`` rather than the fixed-axis factor.
    """
    basis = build_basis(n_atoms, max_rydberg=0)
    if initial is None:
        initial = coherent_state(basis, polar=np.pi / 2, azimuth=0.0)
    initial = _default_initial(basis, initial)
    hamiltonian = build_one_axis_hamiltonian(basis, chi)
    evolver = StaticEvolver(basis, hamiltonian, t_final / n_steps, n_steps, label="one-axis")
    metadata = {"model": "one_axis", "n_atoms": n_atoms, "chi": chi, "dt": t_final / n_steps}
    return evolver.run(initial, progress=progress, metadata=metadata)
