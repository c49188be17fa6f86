"""Ensemble driven by several lasers, in the blockaded symmetric basis.

In the frame where the Rydberg level sits at the reference detuning, the
Hamiltonian reads::

    H(t) = delta_ref n_r + sum_lasers [(rabi/2) r†x e^{i (delta - delta_ref) t} + h.c.]

The blockade removes every configuration with two Rydberg excitations
(``max_rydberg=1``). When all the frame frequencies are harmonics of a base
frequency, the RK4 map over one period is computed once and reused.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import scipy.sparse as sparse
from numpy.polynomial import polynomial

from .errors import InvalidStateError, StepSizeError
from .evolution import EvolverBase, SqueezingTrace
from .floquet import commensurate_base
from .integrators import (
    MAX_PHASE_PER_STEP,
    NormMonitor,
    check_step,
    operator_norm_bound,
    rk4_propagator,
    rk4_step,
)
from .lasers import LaserSet, single_laser_set
from .spin_core import NORM_TOLERANCE, DickeBasis, DickeState, build_basis, ladder_action

logger = logging.getLogger(__name__)

PERTURBATIVE_RATIO = 0.1
MAX_HARMONIC = 64
DEFAULT_PHASE_PER_STEP = 0.02


@dataclass
class TimeDependentHamiltonian:
    """``H(t) = static + sum_k (K_k e^{i w_k t} + K_k† e^{-i w_k t})``.

    Attributes
    ----------
    basis: DickeBasis
        Basis the operators act on.
    static: sparse matrix
        Time-independent part (Rydberg detuning and lasers at the frame
        frequency).
    frequencies: list of float
        Non-zero frame frequencies ``w_k``.
    raising_terms: list of sparse matrices
        The ``K_k``, sums of ``(rabi/2) r†x`` over the lasers sharing ``w_k``.
    """

    basis: DickeBasis
    static: sparse.csr_matrix
    frequencies: List[float] = field(default_factory=list)
    raising_terms: List[sparse.csr_matrix] = field(default_factory=list)

    def __call__(self, t: float) -> sparse.csr_matrix:
        matrix = self.static.copy()
        for frequency, term in zip(self.frequencies, self.raising_terms):
            phase = np.exp(1j * frequency * t)
            matrix = matrix + phase * term + np.conj(phase) * term.getH()
        return matrix.tocsr()

    def apply(self, t: float, psi: np.ndarray) -> np.ndarray:
        result = self.static @ psi
        for frequency, term in zip(self.frequencies, self.raising_terms):
            phase = np.exp(1j * frequency * t)
            result = result + phase * (term @ psi) + np.conj(phase) * (term.getH() @ psi)
        return result

    @property
    def is_static(self) -> bool:
        return not self.frequencies

    def norm_bound(self) -> float:
        """Row-sum bound of ``|H(t)|`` valid at every t."""
        envelope = abs(self.static)
        for term in self.raising_terms:
            envelope = envelope + abs(term) + abs(term.getH())
        return operator_norm_bound(envelope.tocsr())

    def max_frequency(self) -> float:
        return max((abs(w) for w in self.frequencies), default=0.0)

    def base_frequency(self, max_harmonic: int = MAX_HARMONIC) -> Optional[float]:
        """Base frequency of the frame frequencies, None if incommensurate."""
        return commensurate_base(self.frequencies, max_harmonic)


def build_time_dependent_hamiltonian(
    basis: DickeBasis, laser_set: LaserSet
) -> TimeDependentHamiltonian:
    """Hamiltonian of ``laser_set`` on ``basis`` in the frame of the reference
    detuning. Lasers with the same frame frequency are merged into one term."""
    if basis.max_rydberg < 1:
        raise ValueError("The laser-driven model needs Rydberg configurations (max_rydberg >= 1)")
    reference = laser_set.reference_detuning
    static = sparse.diags(reference * basis.n_r, format="csr", dtype=complex)
    grouped: Dict[float, sparse.csr_matrix] = {}
    for laser, frequency in zip(laser_set, laser_set.frame_frequencies()):
        term = laser.coupling * ladder_action(basis, laser.ladder)
        key = float(np.round(frequency, 12))
        grouped[key] = grouped[key] + term if key in grouped else term
    frequencies, raising_terms = [], []
    for frequency, term in grouped.items():
        if frequency == 0:
            static = static + term + term.getH()
        else:
            frequencies.append(frequency)
            raising_terms.append(term.tocsr())
    return TimeDependentHamiltonian(
        basis=basis,
        static=static.tocsr(),
        frequencies=frequencies,
        raising_terms=raising_terms,
    )


def max_stable_step(
    hamiltonian: TimeDependentHamiltonian, max_phase: float = DEFAULT_PHASE_PER_STEP
) -> float:
    """Largest dt keeping both ``|H| dt`` and ``w_max dt`` under ``max_phase``."""
    scale = max(hamiltonian.norm_bound(), hamiltonian.max_frequency())
    return np.inf if scale == 0 else max_phase / scale


@dataclass
class SteppingPlan:
    """How a run is cut into steps and records.

    In periodic mode ``dt`` divides the period exactly and the records fall
    on multiples of the period.
    """

    dt: float
    steps_per_record: int
    n_records: int
    period_steps: Optional[int] = None

    @property
    def record_interval(self) -> float:
        return self.dt * self.steps_per_record

    @property
    def periodic(self) -> bool:
        return self.period_steps is not None


def make_plan(
    hamiltonian: TimeDependentHamiltonian,
    dt: float,
    t_final: float,
    record_every: int = 1,
    use_periodic: bool = True,
) -> SteppingPlan:
    base = hamiltonian.base_frequency() if use_periodic else None
    if base is not None:
        period = 2 * np.pi / base
        period_steps = int(np.ceil(period / dt - 1e-9))
        dt = period / period_steps
        periods_per_record = max(1, int(round(record_every / period_steps)))
        steps_per_record = periods_per_record * period_steps
    else:
        period_steps = None
        steps_per_record = record_every
    n_records = max(1, int(round(t_final / (dt * steps_per_record))))
    return SteppingPlan(
        dt=dt,
        steps_per_record=steps_per_record,
        n_records=n_records,
        period_steps=period_steps,
    )


def _steps_propagator(
    hamiltonian: TimeDependentHamiltonian, dt: float, n_steps: int
) -> np.ndarray:
    """Dense matrix of ``n_steps`` RK4 steps starting at t=0."""
    if hamiltonian.is_static:
        return np.linalg.matrix_power(rk4_propagator(hamiltonian.static, dt), n_steps)
    propagator = np.eye(hamiltonian.basis.dimension, dtype=complex)
    for step in range(n_steps):
        propagator = rk4_step(propagator, hamiltonian.apply, step * dt, dt)
    return propagator


def iter_propagation(
    hamiltonian: TimeDependentHamiltonian,
    psi: np.ndarray,
    plan: SteppingPlan,
    monitor: Optional[NormMonitor] = None,
) -> Iterator[Tuple[float, np.ndarray]]:
    """Yield ``(t, psi)`` at t=0 and after each record interval.

    ``psi`` may be a matrix whose columns are propagated together; in that
    case pass no ``monitor``.
    """
    if monitor is not None:
        monitor.update(psi, 0.0)
    yield 0.0, psi
    if hamiltonian.is_static or plan.periodic:
        if hamiltonian.is_static:
            transfer = _steps_propagator(hamiltonian, plan.dt, plan.steps_per_record)
        else:
            period = _steps_propagator(hamiltonian, plan.dt, plan.period_steps)
            periods_per_record = plan.steps_per_record // plan.period_steps
            transfer = np.linalg.matrix_power(period, periods_per_record)
        for record in range(1, plan.n_records + 1):
            psi = transfer @ psi
            t = record * plan.record_interval
            if monitor is not None:
                monitor.update(psi, t)
            yield t, psi
        return
    step = 0
    for record in range(1, plan.n_records + 1):
        for _ in range(plan.steps_per_record):
            psi = rk4_step(psi, hamiltonian.apply, step * plan.dt, plan.dt)
            step += 1
            if monitor is not None:
                monitor.update(psi, step * plan.dt)
        yield record * plan.record_interval, psi


@dataclass
class BlockadeConfig:
    """Parameters of a laser-driven run.

    Attributes
    ----------
    n_atoms: int
        Number of atoms N.
    laser_set: LaserSet
        The driving fields (angular frequencies, rad/µs).
    t_final: float
        Duration (µs). Rounded to whole periods when the periodic path is used.
    dt: float
        Requested time step (µs). The periodic path shortens it so that it
        divides the period.
    record_every: int
        Number of steps between recorded samples.
    use_periodic: bool
        Allow the one-period transfer matrix when the laser frequencies are
        commensurate.
    """

    n_atoms: int
    laser_set: LaserSet
    t_final: float
    dt: float
    record_every: int = 1
    use_periodic: bool = True

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise ValueError(f"n_atoms must be a positive integer, got {self.n_atoms}")
        if not self.t_final > 0:
            raise ValueError(f"t_final must be positive, got {self.t_final}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")
        if not self.dt > 0:
            raise StepSizeError(f"Time step must be positive, got {self.dt}")
        check_step(self.laser_set.max_frame_frequency(), self.dt)

    @property
    def basis(self) -> DickeBasis:
        return build_basis(self.n_atoms, max_rydberg=1)

    @classmethod
    def with_automatic_step(
        cls,
        n_atoms: int,
        laser_set: LaserSet,
        t_final: float,
        record_interval: Optional[float] = None,
        max_phase: float = DEFAULT_PHASE_PER_STEP,
    ) -> "BlockadeConfig":
        """Config whose step keeps ``max_phase`` rad per step, recording about
        every ``record_interval`` µs (every step by default)."""
        hamiltonian = build_time_dependent_hamiltonian(build_basis(n_atoms, 1), laser_set)
        dt = min(max_stable_step(hamiltonian, max_phase), t_final)
        record_every = 1 if record_interval is None else max(1, int(round(record_interval / dt)))
        return cls(
            n_atoms=n_atoms,
            laser_set=laser_set,
            t_final=t_final,
            dt=dt,
            record_every=record_every,
        )


class BlockadeEvolver(EvolverBase):
    def __init__(self, config: BlockadeConfig):
        self.config = config
        self.basis = config.basis
        self.label = "blockade"
        self.hamiltonian = build_time_dependent_hamiltonian(self.basis, config.laser_set)
        check_step(self.hamiltonian.norm_bound(), config.dt, MAX_PHASE_PER_STEP)
        self.plan = make_plan(
            self.hamiltonian,
            config.dt,
            config.t_final,
            config.record_every,
            use_periodic=config.use_periodic,
        )
        steps_between_checks = self.plan.steps_per_record if self._uses_transfer else 1
        self.monitor = NormMonitor(
            step_tolerance=NORM_TOLERANCE * steps_between_checks, label="blockade"
        )

    @property
    def _uses_transfer(self) -> bool:
        return self.hamiltonian.is_static or self.plan.periodic

    @property
    def n_records(self) -> int:
        return self.plan.n_records + 1

    def _iter_states(self, initial: DickeState) -> Iterator[Tuple[float, np.ndarray]]:
        return iter_propagation(
            self.hamiltonian, initial.amplitudes.copy(), self.plan, monitor=self.monitor
        )


def describe_lasers(laser_set: LaserSet) -> List[dict]:
    return [
        {
            "label": laser.label,
            "transition": laser.transition,
            "rabi": [float(np.real(laser.rabi)), float(np.imag(laser.rabi))],
            "detuning": laser.detuning,
        }
        for laser in laser_set
    ]


def evolve_blockade(
    config: BlockadeConfig, initial: Optional[DickeState] = None, progress: bool = False
) -> SqueezingTrace:
    """Integrate the laser-driven ensemble, all atoms in ``a`` by default.

    Raises
    ------
    StepSizeError
        If the step is too coarse for the Hamiltonian or the frame frequencies.
    IntegrationError
        If the norm drifts beyond the hard tolerance.
    """
    evolver = BlockadeEvolver(config)
    basis = evolver.basis
    if initial is None:
        initial = DickeState.all_in_a(basis)
    elif initial.basis != basis:
        raise InvalidStateError(
            f"Initial state has dimension {initial.basis.dimension}, "
            f"expected {basis.dimension} for N={basis.n_atoms}"
        )
    plan = evolver.plan
    logger.info(
        "Blockade evolution: N=%d, %d lasers, dt=%.3g, %d records every %d steps%s",
        config.n_atoms,
        len(config.laser_set),
        plan.dt,
        plan.n_records,
        plan.steps_per_record,
        " (periodic)" if plan.periodic else "",
    )
    metadata = {
        "model": "blockade",
        "n_atoms": config.n_atoms,
        "dt": plan.dt,
        "steps_per_record": plan.steps_per_record,
        "periodic": plan.periodic,
        "phase_convention": config.laser_set.phase_convention,
        "lasers": describe_lasers(config.laser_set),
    }
    trace = evolver.run(initial, progress=progress, metadata=metadata)
    trace.metadata["max_step_norm_drift"] = evolver.monitor.max_step_drift
    return trace


def filtered_phase_slope(
    times: np.ndarray, amplitudes: np.ndarray, window: int
) -> np.ndarray:
    """Slope of the unwrapped phase of each column of ``amplitudes``.

    The signals are smoothed by two passes of a ``window``-sample moving
    average first, which suppresses the fast micromotion without changing the
    slow phase slope.
    """
    amplitudes = np.asarray(amplitudes)
    if amplitudes.ndim == 1:
        amplitudes = amplitudes[:, None]
    window = max(1, int(window))
    if len(times) < 2 * window + 1:
        raise ValueError(
            f"Need more than {2 * window} samples for a window of {window}, got {len(times)}"
        )
    kernel = np.ones(window) / window

    def smooth(signal):
        once = np.convolve(signal, kernel, mode="valid")
        return np.convolve(once, kernel, mode="valid")

    smoothed_times = smooth(np.asarray(times, dtype=float))
    smoothed = np.column_stack([smooth(column) for column in amplitudes.T])
    phases = np.unwrap(np.angle(smoothed), axis=0)
    return polynomial.polyfit(smoothed_times, phases, 1)[1]


@dataclass
class LightShiftTrace:
    """Energy shift of each ground configuration ``|n_a, n_r=0>``, from the
    phase it accumulates.

    Attributes
    ----------
    n_a: np.ndarray
        Number of atoms in ``a`` of each measured configuration.
    shifts: np.ndarray
        Measured energy shift (rad/µs) per ``n_a``.
    omega, delta: float
        Matrix element and detuning of the laser (single-laser runs), or NaN.
    blockade: bool
        Whether double Rydberg excitation was removed.
    non_perturbative: bool
        Set when ``omega / delta`` exceeds 0.1.
    """

    n_a: np.ndarray
    shifts: np.ndarray
    omega: float = np.nan
    delta: float = np.nan
    blockade: bool = True
    non_perturbative: bool = False

    def polynomial_coefficients(self, degree: int = 3) -> np.ndarray:
        """Coefficients (constant term first) of a fit of the shift in n_a."""
        degree = min(degree, len(self.n_a) - 1)
        return polynomial.polyfit(self.n_a, self.shifts, degree)

    def quadratic_coefficient(self, degree: int = 3) -> float:
        if len(self.n_a) < 3:
            raise ValueError("A quadratic coefficient needs at least three values of n_a")
        return float(self.polynomial_coefficients(degree)[2])

    def spread(self) -> float:
        """Peak-to-peak shift over the measured configurations."""
        return float(np.ptp(self.shifts))


def _ground_columns(basis: DickeBasis) -> np.ndarray:
    columns = np.zeros((basis.dimension, basis.n_atoms + 1), dtype=complex)
    for n_a in range(basis.n_atoms + 1):
        columns[basis.index(n_a, 0), n_a] = 1
    return columns


def _measure_sector_shifts(
    hamiltonian: TimeDependentHamiltonian,
    t_final: float,
    dt: float,
    smoothing_time: float,
) -> np.ndarray:
    basis = hamiltonian.basis
    plan = make_plan(hamiltonian, dt, t_final)
    columns = _ground_columns(basis)
    diagonal = [basis.index(n_a, 0) for n_a in range(basis.n_atoms + 1)]
    times, samples = [], []
    for t, psi in iter_propagation(hamiltonian, columns, plan):
        times.append(t)
        samples.append(psi[diagonal, np.arange(basis.n_atoms + 1)])
    window = max(1, int(round(smoothing_time / plan.record_interval)))
    slopes = filtered_phase_slope(np.array(times), np.array(samples), window)
    # psi ~ exp(-i E t)
    return -slopes


def single_laser_run(
    n_atoms: int,
    omega: float,
    delta: float,
    blockade: bool = True,
    t_final: Optional[float] = None,
    max_phase: float = DEFAULT_PHASE_PER_STEP,
) -> LightShiftTrace:
    """Light shift of each ``|n_a>`` under one a-r laser of matrix element
    ``omega`` at detuning ``delta``.

    With ``blockade=False`` the configurations with two Rydberg excitations
    are kept. Each ground configuration is evolved for ``t_final`` (1000/delta
    by default) and its energy is the slope of its phase.
    """
    if delta == 0:
        raise ValueError("The light-shift run needs a non-zero detuning")
    ratio = abs(omega / delta)
    non_perturbative = ratio > PERTURBATIVE_RATIO
    if non_perturbative:
        logger.warning(
            "omega/delta = %.3g exceeds %.2g: the light shift is not perturbative",
            ratio,
            PERTURBATIVE_RATIO,
        )
    if t_final is None:
        t_final = 1000 / abs(delta)
    basis = build_basis(n_atoms, max_rydberg=1 if blockade else 2)
    hamiltonian = build_time_dependent_hamiltonian(basis, single_laser_set(omega, delta))
    dt = max_stable_step(hamiltonian, max_phase)
    shifts = _measure_sector_shifts(hamiltonian, t_final, dt, smoothing_time=50 / abs(delta))
    return LightShiftTrace(
        n_a=np.arange(n_atoms + 1, dtype=float),
        shifts=shifts,
        omega=float(omega),
        delta=float(delta),
        blockade=blockade,
        non_perturbative=non_perturbative,
    )


def sector_light_shifts(
    n_atoms: int,
    laser_set: LaserSet,
    t_final: float,
    smoothing_time: Optional[float] = None,
    max_phase: float = DEFAULT_PHASE_PER_STEP,
) -> LightShiftTrace:
    """Energy shift of each ``|n_a, n_b = N - n_a>`` under a full laser set.

    ``t_final`` must stay short compared with the pair-transfer time so that
    the phases are dominated by the light shifts.
    """
    basis = build_basis(n_atoms, max_rydberg=1)
    hamiltonian = build_time_dependent_hamiltonian(basis, laser_set)
    if smoothing_time is None:
        slowest = hamiltonian.base_frequency() or abs(laser_set.reference_detuning)
        smoothing_time = 4 * 2 * np.pi / slowest
    dt = max_stable_step(hamiltonian, max_phase)
    shifts = _measure_sector_shifts(hamiltonian, t_final, dt, smoothing_time)
    return LightShiftTrace(n_a=np.arange(n_atoms + 1, dtype=float), shifts=shifts)
