"""Fixed-step integration of the Schrödinger equation i dpsi/dt = H(t) psi.

States can be vectors or matrices whose columns are propagated together.
"""

import logging
from typing import Callable, Union

import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse

from .errors import IntegrationError, StepSizeError
from .spin_core import HARD_NORM_TOLERANCE, NORM_TOLERANCE

logger = logging.getLogger(__name__)

MAX_PHASE_PER_STEP = 0.1
MAX_EXACT_DIMENSION = 200

Operator = Union[np.ndarray, sparse.spmatrix]
HamiltonianAction = Callable[[float, np.ndarray], np.ndarray]


def operator_norm_bound(hamiltonian: Operator) -> float:
    """Upper bound of the spectral norm: the largest absolute row sum."""
    if sparse.issparse(hamiltonian):
        return float(abs(hamiltonian).sum(axis=1).max()) if hamiltonian.nnz else 0.0
    return float(np.abs(hamiltonian).sum(axis=1).max()) if hamiltonian.size else 0.0


def check_step(norm_bound: float, dt: float, limit: float = MAX_PHASE_PER_STEP):
    """Raise ``StepSizeError`` when ``norm_bound * dt`` exceeds ``limit`` radians."""
    if dt <= 0:
        raise StepSizeError(f"Time step must be positive, got {dt}")
    if norm_bound * dt > limit:
        raise StepSizeError(
            f"Step too coarse: |H| dt = {norm_bound * dt:.3g} rad > {limit} rad "
            f"(use dt <= {limit / norm_bound:.3g})"
        )


def steps_for_duration(
    norm_bound: float, duration: float, max_phase: float = MAX_PHASE_PER_STEP / 2
) -> int:
    """Smallest number of steps covering ``duration`` with at most
    ``max_phase`` radians per step."""
    if duration <= 0:
        raise ValueError(f"Duration must be positive, got {duration}")
    return max(1, int(np.ceil(norm_bound * duration / max_phase)))


def rk4_step(
    psi: np.ndarray, apply_hamiltonian: HamiltonianAction, t: float, dt: float
) -> np.ndarray:
    """One Runge-Kutta 4 step of dpsi/dt = -i H(t) psi."""
    half = dt / 2

    def derivative(time, state):
        return -1j * apply_hamiltonian(time, state)

    k1 = derivative(t, psi)
    k2 = derivative(t + half, psi + half * k1)
    k3 = derivative(t + half, psi + half * k2)
    k4 = derivative(t + dt, psi + dt * k3)
    return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_propagator(hamiltonian: Operator, dt: float) -> np.ndarray:
    """Dense matrix of one RK4 step for a static Hamiltonian.

    RK4 applied to a linear time-independent equation is the degree-4 Taylor
    polynomial of exp(-i H dt).
    """
    generator = -1j * dt * _dense(hamiltonian)
    propagator = np.eye(generator.shape[0], dtype=complex)
    term = propagator.copy()
    for order in range(1, 5):
        term = term @ generator / order
        propagator = propagator + term
    return propagator


def exact_propagator(hamiltonian: Operator, t: float) -> np.ndarray:
    """exp(-i H t) by dense matrix exponential, for small dimensions."""
    dense = _dense(hamiltonian)
    if dense.shape[0] > MAX_EXACT_DIMENSION:
        raise ValueError(
            f"Exact propagation is limited to dimension {MAX_EXACT_DIMENSION}, "
            f"got {dense.shape[0]}"
        )
    return linalg.expm(-1j * t * dense)


def _dense(hamiltonian: Operator) -> np.ndarray:
    if sparse.issparse(hamiltonian):
        return hamiltonian.toarray().astype(complex)
    return np.asarray(hamiltonian, dtype=complex)


class NormMonitor:
    """Track the norm of an integrated state.

    A per-step change above ``step_tolerance`` is logged once per run; a total
    deviation above ``hard_tolerance`` raises ``IntegrationError``.
    """

    def __init__(
        self,
        step_tolerance: float = NORM_TOLERANCE,
        hard_tolerance: float = HARD_NORM_TOLERANCE,
        label: str = "evolution",
    ):
        self.step_tolerance = step_tolerance
        self.hard_tolerance = hard_tolerance
        self.label = label
        self.max_step_drift = 0.0
        self._previous = None
        self._warned = False

    def update(self, psi: np.ndarray, t: float) -> float:
        norm = float(np.vdot(psi, psi).real)
        if self._previous is not None:
            drift = abs(norm - self._previous)
            self.max_step_drift = max(self.max_step_drift, drift)
            if drift > self.step_tolerance and not self._warned:
                logger.warning(
                    "%s: norm changed by %.2e in one step at t=%.6g", self.label, drift, t
                )
                self._warned = True
        self._previous = norm
        if abs(norm - 1) > self.hard_tolerance:
            raise IntegrationError(
                f"{self.label}: norm drifted to {norm:.9f} at t={t:.6g} "
                f"(tolerance {self.hard_tolerance:.0e})"
            )
        return norm
