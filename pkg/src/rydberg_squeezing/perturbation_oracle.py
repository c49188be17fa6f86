"""Brute-force checks of the perturbative light shifts and four-photon coupling.

The light shifts are obtained by exact diagonalization in the full product
space of up to six atoms. The pair coupling between ``|aa>`` and ``|bb>`` is
measured on two atoms in the 9-state product space, with a finite Rydberg
interaction, through the exact Floquet solution of the periodic Hamiltonian.

Sign convention: the pair coupling ``omega_c`` is reported with the phase of
``|b>`` multiplied by ``i`` for each atom, so that the blockaded three-laser
value reads ``-4 W0^2 W1 W2 / (D (D - D') (D + D'))``. In the basis used by
the simulation the matrix element <bb|H_eff|aa> is ``-omega_c``.
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from itertools import product
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
import scipy.linalg as linalg
import scipy.sparse as sparse

from . import tensor_space
from .blockade_model import LightShiftTrace, filtered_phase_slope
from .errors import AmbiguousBranchError, UnreliableFitError
from .evolution import run_in_parallel
from .floquet import (
    FloquetSolution,
    FourierHamiltonian,
    commensurate_base,
    effective_hamiltonian,
)
from .lasers import PHASE_CONVENTIONS, UNSHIFTED_CONVENTION, LaserSet, standard_six_laser_set
from .spin_core import build_basis, ladder_action

logger = logging.getLogger(__name__)

MAX_EXACT_ATOMS = 6
LIGHT_SHIFT_RATIO = 0.05
RELATIVE_ERROR_FLOOR = 1e-12
AMPLITUDE_FLOOR = 1e-6
MAX_FIT_RESIDUAL = 0.05
SHIFT_SUPPRESSION = 0.1
COUPLING_RETENTION = 0.5
PERTURBATIVE_RATIO_TWO_ATOMS = 0.1
COUPLING_FLOOR = 0.01

TWO_ATOM_STATES = ["".join(levels) for levels in product("abr", repeat=2)]


@dataclass
class PerturbationReport:
    """A perturbative prediction next to the brute-force value.

    ``relative_error = |measured - predicted| / max(|predicted|, floor)``; the
    default floor (1e-12, in the unit of the compared quantity) only matters
    when the prediction vanishes.
    """

    predicted: float
    measured: float
    relative_error: float
    regime_ok: bool
    floor: float = RELATIVE_ERROR_FLOOR

    @classmethod
    def compare(
        cls,
        predicted: float,
        measured: float,
        regime_ok: bool = True,
        floor: float = RELATIVE_ERROR_FLOOR,
    ) -> "PerturbationReport":
        relative_error = abs(measured - predicted) / max(abs(predicted), floor)
        return cls(
            predicted=float(predicted),
            measured=float(measured),
            relative_error=float(relative_error),
            regime_ok=bool(regime_ok),
            floor=floor,
        )

    def to_dict(self) -> dict:
        return {
            "predicted": self.predicted,
            "measured": self.measured,
            "relative_error": self.relative_error,
            "regime_ok": self.regime_ok,
        }


# Light shifts


def _check_light_shift_regime(n_atoms: int, omega: float, delta: float) -> bool:
    if n_atoms > MAX_EXACT_ATOMS:
        raise ValueError(
            f"Exact light shifts are limited to {MAX_EXACT_ATOMS} atoms, got {n_atoms}"
        )
    if delta == 0:
        raise ValueError("The light shift needs a non-zero detuning")
    regime_ok = abs(omega / delta) <= LIGHT_SHIFT_RATIO
    if not regime_ok:
        logger.warning("omega/delta = %.3g is outside the perturbative range", omega / delta)
    return regime_ok


def light_shift_exact(
    n_atoms: int, omega: float, delta: float, u_int: float
) -> LightShiftTrace:
    """Exact energy of the dressed state connected to each ``|n_a, 0>``.

    The Hamiltonian ``sum_i [delta n_r^i + omega (|r><a|_i + h.c.)] +
    u_int sum_{i<j} n_r^i n_r^j`` is diagonalized in the full 3^N space. The
    reference product state of each n_a has its first n_a atoms in ``a`` and
    the others in ``b``. ``u_int = inf`` removes the doubly excited states.

    Raises
    ------
    AmbiguousBranchError
        If no eigenvalue carries more than half of a reference state.
    """
    regime_ok = _check_light_shift_regime(n_atoms, omega, delta)
    excitation = tensor_space.collective_transition("r†a", n_atoms)
    occupation = tensor_space.collective_transition("r†r", n_atoms)
    hamiltonian = delta * occupation + omega * (excitation + excitation.getH())
    kept = np.arange(3**n_atoms)
    if np.isinf(u_int):
        kept = np.flatnonzero(tensor_space.rydberg_counts(n_atoms) < 2)
    else:
        hamiltonian = hamiltonian + tensor_space.rydberg_interaction(n_atoms, u_int)
    dense = hamiltonian.tocsr()[kept][:, kept].toarray()
    energies, vectors = linalg.eigh(dense)
    tolerance = max(1e-9 * abs(delta), 1e3 * np.finfo(float).eps * np.abs(energies).max())
    shifts = []
    for n_a in range(n_atoms + 1):
        reference = tensor_space.product_state("a" * n_a + "b" * (n_atoms - n_a))[kept]
        weights = np.abs(vectors.conj().T @ reference) ** 2
        best = int(np.argmax(weights))
        cluster = np.abs(energies - energies[best]) <= tolerance
        if weights[cluster].sum() <= 0.5:
            raise AmbiguousBranchError(
                f"n_a={n_a}: the dressed branch holds only {weights[cluster].sum():.3f} "
                "of the reference state"
            )
        shifts.append(float(np.mean(energies[cluster])))
    return LightShiftTrace(
        n_a=np.arange(n_atoms + 1, dtype=float),
        shifts=np.array(shifts),
        omega=float(omega),
        delta=float(delta),
        blockade=bool(u_int != 0),
        non_perturbative=not regime_ok,
    )


def fourth_order_sum(n_atoms: int, omega: float, delta: float, u_int: float) -> np.ndarray:
    """Light shift of each ``|n_a, 0>`` to fourth order in ``omega``.

    Sums over the intermediate configurations ``|n_a - 1, 1>`` and
    ``|n_a - 2, 2>``, the latter shifted by ``u_int`` (and absent when
    ``u_int`` is infinite).
    """
    if delta == 0:
        raise ValueError("The light shift needs a non-zero detuning")
    basis = build_basis(n_atoms, max_rydberg=2)
    coupling = (omega * ladder_action(basis, "r†a")).toarray()
    shifts = []
    for n_a in range(n_atoms + 1):
        initial = basis.index(n_a, 0)
        if n_a == 0:
            shifts.append(0.0)
            continue
        single = basis.index(n_a - 1, 1)
        first = abs(coupling[single, initial]) ** 2
        second_order = -first / delta
        fourth_order = first**2 / delta**3
        if n_a >= 2 and not np.isinf(u_int):
            double = basis.index(n_a - 2, 2)
            second = abs(coupling[double, single]) ** 2
            fourth_order -= first * second / (delta**2 * (2 * delta + u_int))
        shifts.append(second_order + fourth_order)
    return np.array(shifts)


def compare_light_shifts(
    n_atoms: int, omega: float, delta: float, u_int: float
) -> PerturbationReport:
    """Compare the n_a^2 coefficients of the fourth-order sum and of the exact
    shifts."""
    exact = light_shift_exact(n_atoms, omega, delta, u_int)
    predicted = LightShiftTrace(
        n_a=exact.n_a, shifts=fourth_order_sum(n_atoms, omega, delta, u_int)
    )
    return PerturbationReport.compare(
        predicted=predicted.quadratic_coefficient(),
        measured=exact.quadratic_coefficient(),
        regime_ok=not exact.non_perturbative,
        floor=abs(omega) ** 6 / abs(delta) ** 5,
    )


# Pair coupling


def _product_terms(
    laser_set: LaserSet, n_atoms: int, u_int: float
) -> Tuple[np.ndarray, List[float], List[np.ndarray], np.ndarray]:
    """Static part, frame frequencies, raising terms and kept states of the
    product-space Hamiltonian of ``n_atoms`` (1 or 2) atoms."""
    occupation = tensor_space.collective_transition("r†r", n_atoms)
    static = laser_set.reference_detuning * occupation
    kept = np.arange(3**n_atoms)
    if n_atoms > 1:
        if np.isinf(u_int):
            kept = np.flatnonzero(tensor_space.rydberg_counts(n_atoms) < 2)
        else:
            static = static + tensor_space.rydberg_interaction(n_atoms, u_int)

    def restrict(matrix):
        return sparse.csr_matrix(matrix)[kept][:, kept].toarray()

    frequencies = list(laser_set.frame_frequencies())
    raising = [
        restrict(laser.coupling * tensor_space.collective_transition(laser.ladder, n_atoms))
        for laser in laser_set
    ]
    return restrict(static), frequencies, raising, kept


def _fourier(
    laser_set: LaserSet, n_atoms: int, u_int: float
) -> Tuple[FourierHamiltonian, np.ndarray]:
    static, frequencies, raising, kept = _product_terms(laser_set, n_atoms, u_int)
    base = commensurate_base(frequencies)
    if base is None:
        if any(frequencies):
            raise ValueError("The laser frequencies are not commensurate")
        base = abs(laser_set.reference_detuning) or 1.0
    return FourierHamiltonian.from_terms(static, frequencies, raising, base), kept


@dataclass
class TwoAtomModel:
    """Two atoms in the full 9-state product space.

    Attributes
    ----------
    lasers: LaserSet
        Fields driving both atoms.
    u_int: float
        Energy shift of ``|rr>`` (angular frequency). ``inf`` removes it.
    n_harmonics: int or None
        Fourier truncation of the Floquet solution; by default twice the
        largest harmonic of the lasers, plus two.
    """

    lasers: LaserSet
    u_int: float
    n_harmonics: Optional[int] = None
    states: List[str] = field(init=False)

    def __post_init__(self):
        self.validate()
        self.fourier, kept = _fourier(self.lasers, 2, self.u_int)
        self.states = [TWO_ATOM_STATES[k] for k in kept]

    def validate(self):
        if np.isnan(self.u_int):
            raise ValueError("u_int must be a number or inf")

    def index(self, state: str) -> int:
        return self.states.index(state)

    def hamiltonian(self, t: float) -> np.ndarray:
        """Physical two-atom Hamiltonian at time t, in the rotating frame."""
        omega = self.fourier.base_frequency
        return sum(
            component * np.exp(1j * q * omega * t)
            for q, component in self.fourier.components.items()
        )

    def solve(self) -> FloquetSolution:
        return self.fourier.solve(self.n_harmonics)


def four_photon_coupling(
    delta: float, delta_prime: float, omega0: float, omega1: float, omega2: float
) -> float:
    """Blockaded pair coupling of the three-laser scheme,
    ``-4 W0^2 W1 W2 / (D (D - D') (D + D'))``."""
    return -4 * omega0**2 * omega1 * omega2 / (
        delta * (delta - delta_prime) * (delta + delta_prime)
    )


def _resonant_terms(laser_set: LaserSet, tolerance: float) -> Iterator[complex]:
    """Fourth-order amplitudes of the resonant sequences in which one atom
    absorbs a pump photon and emits a Stokes photon, then the other atom does
    the same. The intermediate energies are ``p_1``, ``p_1 - s_1`` and
    ``p_1 - s_1 + p_2`` (the detunings of the fields involved)."""
    pumps = laser_set.on_transition("a-r")
    stokes = laser_set.on_transition("b-r")
    scale = max(abs(laser.detuning) for laser in laser_set)
    for pump_1, stokes_1, pump_2, stokes_2 in product(pumps, stokes, pumps, stokes):
        raman_1 = pump_1.detuning - stokes_1.detuning
        final = raman_1 + pump_2.detuning - stokes_2.detuning
        if abs(final) > tolerance * scale:
            continue
        energies = (pump_1.detuning, raman_1, raman_1 + pump_2.detuning)
        if min(abs(e) for e in energies) <= tolerance * scale:
            raise ValueError("A resonant intermediate state makes the coupling diverge")
        numerator = (
            pump_1.coupling
            * np.conj(stokes_1.coupling)
            * pump_2.coupling
            * np.conj(stokes_2.coupling)
        )
        yield numerator / np.prod(energies)


def perturbative_pair_coupling(laser_set: LaserSet, tolerance: float = 1e-9) -> complex:
    """Fourth-order blockaded coupling ``|aa> -> |bb>`` of any laser set,
    reported in the convention of the module docstring."""
    return complex(2 * sum(_resonant_terms(laser_set, tolerance)))


def pair_coupling_scale(laser_set: LaserSet, tolerance: float = 1e-9) -> float:
    """Sum of the magnitudes of the terms of ``perturbative_pair_coupling``.

    It stays finite when interfering sequences cancel the coupling.
    """
    return float(2 * sum(abs(term) for term in _resonant_terms(laser_set, tolerance)))


@dataclass
class PairCouplingMeasurement:
    """Pair coupling extracted from the exact two-atom evolution.

    Attributes
    ----------
    omega_c: complex
        Fitted coupling (module sign convention).
    effective_coupling: complex
        Same quantity read off the exact effective Hamiltonian of {aa, bb}.
    e_aa, e_bb: float
        Energies of the dressed ``|aa>`` and ``|bb>`` from their phase slopes.
    residual: float
        Relative rms residual of the fit.
    max_bb_population: float
        Largest ``|<bb|psi>|^2`` over the fit window.
    times, bb_amplitudes: np.ndarray
        The stroboscopic samples that were fitted.
    """

    omega_c: complex
    effective_coupling: complex
    e_aa: float
    e_bb: float
    residual: float
    max_bb_population: float
    times: np.ndarray = field(repr=False)
    bb_amplitudes: np.ndarray = field(repr=False)


def _transfer_profile(times: np.ndarray, e_aa: float, e_bb: float) -> np.ndarray:
    """``(e^{-i e_bb t} - e^{-i e_aa t}) / (e_bb - e_aa)``, first-order amplitude
    of ``|bb>`` for a unit coupling."""
    gap = e_bb - e_aa
    if abs(gap) * times[-1] < 1e-6:
        return -1j * times * np.exp(-1j * e_aa * times)
    return (np.exp(-1j * e_bb * times) - np.exp(-1j * e_aa * times)) / gap


def effective_pair_coupling(
    model: TwoAtomModel, solution: Optional[FloquetSolution] = None
) -> Tuple[complex, np.ndarray]:
    """Pair coupling read off the exact effective Hamiltonian of {aa, bb}.

    Returns ``(omega_c, h_eff)`` in the module sign convention.
    """
    if solution is None:
        solution = model.solve()
    h_eff, _ = effective_hamiltonian(solution, [model.index("aa"), model.index("bb")])
    return complex(-h_eff[1, 0]), h_eff


def pair_coupling_measure(
    model: TwoAtomModel,
    n_samples: int = 401,
    transfer_angle: float = 0.1,
    max_residual: float = MAX_FIT_RESIDUAL,
) -> PairCouplingMeasurement:
    """Evolve ``|aa>`` exactly and fit the growth of ``<bb|psi>``.

    The state is sampled at multiples of the laser period, which removes the
    micromotion. The window is chosen so that the blockaded perturbative
    coupling would transfer an angle ``transfer_angle``; the amplitude is then
    fitted to ``c_1 g(t) + c_0 e^{-i e_aa t}`` with ``g`` the first-order
    transfer profile, and ``omega_c = -c_1``.

    Raises
    ------
    UnreliableFitError
        If the relative rms residual exceeds ``max_residual``.
    """
    solution = model.solve()
    aa, bb = model.index("aa"), model.index("bb")
    period = solution.period
    reference = abs(perturbative_pair_coupling(model.lasers))
    # interfering sequences can cancel the coupling; the window then follows
    # the size of the individual terms
    rate = max(reference, COUPLING_FLOOR * pair_coupling_scale(model.lasers))
    t_window = transfer_angle / rate if rate > 0 else 400 * period
    effective_coupling, h_eff = effective_pair_coupling(model, solution)
    energy_scale = float(np.abs(np.diag(h_eff)).max())
    n_periods = max(n_samples - 1, int(np.ceil(t_window / period)))
    n_samples = min(n_periods + 1, max(n_samples, int(4 * energy_scale * t_window) + 1))
    times = period * np.unique(np.round(np.linspace(0, n_periods, n_samples)))

    start_aa = np.zeros(solution.dimension, dtype=complex)
    start_aa[aa] = 1
    start_bb = np.zeros(solution.dimension, dtype=complex)
    start_bb[bb] = 1
    from_aa = solution.stroboscopic_states(start_aa, times)
    from_bb = solution.stroboscopic_states(start_bb, times)
    window = max(1, len(times) // 40)
    e_aa = -float(filtered_phase_slope(times, from_aa[:, aa], window)[0])
    e_bb = -float(filtered_phase_slope(times, from_bb[:, bb], window)[0])

    data = from_aa[:, bb]
    design = np.column_stack([_transfer_profile(times, e_aa, e_bb), np.exp(-1j * e_aa * times)])
    coefficients, *_ = np.linalg.lstsq(design, data, rcond=None)
    residuals = data - design @ coefficients
    scale = max(
        np.sqrt(np.mean(np.abs(data) ** 2)), reference * times[-1] / 2, AMPLITUDE_FLOOR
    )
    residual = float(np.sqrt(np.mean(np.abs(residuals) ** 2)) / scale)
    if residual > max_residual:
        raise UnreliableFitError(
            f"Pair-coupling fit residual {residual:.3g} exceeds {max_residual}"
        )
    measurement = PairCouplingMeasurement(
        omega_c=complex(-coefficients[0]),
        effective_coupling=effective_coupling,
        e_aa=e_aa,
        e_bb=e_bb,
        residual=residual,
        max_bb_population=float(np.max(np.abs(data) ** 2)),
        times=times,
        bb_amplitudes=data,
    )
    logger.info(
        "Pair coupling: fitted %s, effective Hamiltonian %s, residual %.2e",
        measurement.omega_c,
        measurement.effective_coupling,
        residual,
    )
    return measurement


def coupling_report(model: TwoAtomModel) -> PerturbationReport:
    """Measured pair coupling against the perturbative sum of the laser set."""
    predicted = perturbative_pair_coupling(model.lasers)
    measured = pair_coupling_measure(model).omega_c
    detunings = [abs(laser.detuning) for laser in model.lasers]
    couplings = [abs(laser.coupling) for laser in model.lasers]
    regime_ok = max(couplings) / min(detunings) <= PERTURBATIVE_RATIO_TWO_ATOMS
    return PerturbationReport.compare(predicted.real, measured.real, regime_ok)


def single_atom_shifts(laser_set: LaserSet) -> Tuple[float, float]:
    """Quasi-energies of the dressed ``|a>`` and ``|b>`` of one atom."""
    fourier, _ = _fourier(laser_set, 1, np.inf)
    solution = fourier.solve()
    return solution.quasi_energy(0)[0], solution.quasi_energy(1)[0]


# Phase-convention audit


@dataclass
class AuditEntry:
    """Outcome of one mirror phase convention.

    ``fixed_axis_coupling`` is the part of the coupling that squeezes along
    theta = -pi/4 from an all-``a`` start (``-Re(omega_c)``).
    """

    convention: str
    shift_a: float
    shift_b: float
    omega_c: complex
    shift_suppressed: bool = False
    coupling_preserved: bool = False

    @property
    def fixed_axis_coupling(self) -> float:
        return -self.omega_c.real

    @property
    def accepted(self) -> bool:
        return self.shift_suppressed and self.coupling_preserved

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "shift_a": self.shift_a,
            "shift_b": self.shift_b,
            "omega_c": [self.omega_c.real, self.omega_c.imag],
            "fixed_axis_coupling": self.fixed_axis_coupling,
            "shift_suppressed": self.shift_suppressed,
            "coupling_preserved": self.coupling_preserved,
        }


@dataclass
class AuditReport:
    """Mirror phase conventions ranked from best to worst.

    ``reference`` is the three-laser configuration, ``unshifted`` the mirror
    set without dephasing; neither is a candidate.
    """

    ranking: List[AuditEntry]
    reference: AuditEntry
    unshifted: AuditEntry

    @property
    def accepted(self) -> List[AuditEntry]:
        return [entry for entry in self.ranking if entry.accepted]

    @property
    def selected(self) -> str:
        """Best accepted convention.

        Raises
        ------
        ValueError
            If no convention suppresses the light shift while keeping the coupling.
        """
        if not self.accepted:
            raise ValueError("No phase convention cancels the light shift and keeps the coupling")
        return self.accepted[0].convention

    def to_dict(self) -> Dict[str, object]:
        return {
            "ranking": [entry.to_dict() for entry in self.ranking],
            "reference": self.reference.to_dict(),
            "unshifted": self.unshifted.to_dict(),
        }


def _audit_one(
    convention: Optional[str],
    delta: float,
    delta_prime: float,
    omegas: Tuple[float, float, float],
    u_int: float,
) -> AuditEntry:
    laser_set = standard_six_laser_set(
        delta,
        delta_prime,
        *omegas,
        phase_convention=convention or UNSHIFTED_CONVENTION,
        include_mirror=convention is not None,
    )
    name = convention or "three_lasers"
    shift_a, shift_b = single_atom_shifts(laser_set)
    model = TwoAtomModel(laser_set, u_int)
    try:
        omega_c = pair_coupling_measure(model).omega_c
    except UnreliableFitError as error:
        logger.warning("%s: %s, using the effective Hamiltonian instead", name, error)
        omega_c, _ = effective_pair_coupling(model)
    return AuditEntry(convention=name, shift_a=shift_a, shift_b=shift_b, omega_c=omega_c)


def phase_convention_audit(
    delta: float,
    delta_prime: float,
    omega0: float,
    omega1: float,
    omega2: float,
    u_int: float = np.inf,
    num_workers: int = 1,
) -> AuditReport:
    """Rank the four mirror phase conventions with the two-atom oracle.

    A convention is accepted when its single-atom light shifts stay below a
    tenth of the three-laser ones and its pair coupling keeps at least half
    of the three-laser magnitude. The ranking puts accepted conventions first,
    then orders by the coupling along theta = -pi/4.
    """
    candidates = [None, UNSHIFTED_CONVENTION] + list(PHASE_CONVENTIONS)
    audit = partial(
        _audit_one,
        delta=delta,
        delta_prime=delta_prime,
        omegas=(omega0, omega1, omega2),
        u_int=u_int,
    )
    entries = run_in_parallel(audit, candidates, num_workers=num_workers)
    reference, unshifted, *conventions = entries
    reference_shift = max(abs(reference.shift_a), abs(reference.shift_b))
    reference_coupling = abs(reference.omega_c)
    for entry in [unshifted] + conventions:
        entry.shift_suppressed = (
            max(abs(entry.shift_a), abs(entry.shift_b)) <= SHIFT_SUPPRESSION * reference_shift
        )
        entry.coupling_preserved = abs(entry.omega_c) >= COUPLING_RETENTION * reference_coupling
    order = {name: k for k, name in enumerate(PHASE_CONVENTIONS)}
    scale = max(reference_coupling, RELATIVE_ERROR_FLOOR)
    ranking = sorted(
        conventions,
        key=lambda entry: (
            not entry.accepted,
            -round(entry.fixed_axis_coupling / scale, 6),
            order[entry.convention],
        ),
    )
    for entry in ranking:
        logger.info("Phase convention %s: %s", entry.convention, entry.to_dict())
    return AuditReport(ranking=ranking, reference=reference, unshifted=unshifted)
