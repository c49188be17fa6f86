"""Order-of-magnitude feasibility estimates: atom losses, adiabaticity,
squeezing time, decay-rate requirement and blockade neighbourhood.

These formulas are heuristics calibrated on plain (non-angular) frequencies:
detunings, couplings and decay rates in MHz, times in µs, lengths in µm and
densities in µm^-3. They are applied to the numbers as quoted, without the
2 pi factor used by the simulators.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from . import tensor_space
from .spin_core import SQUEEZING_AXIS, DickeState

logger = logging.getLogger(__name__)

# An atom at 3 µm from another is blockaded at a 50 MHz detuning, with the
# interaction 10 times the detuning.
REFERENCE_BLOCKADE_RADIUS = 3.0
REFERENCE_DETUNING = 50.0
DEFAULT_STRENGTH_MARGIN = 10.0
DEFAULT_ADIABATIC_MARGIN = 10.0
DEFAULT_DENSITY_CM3 = 2e11
NEGLIGIBLE_LOSS = 0.1


def density_from_cm3(density_cm3: float) -> float:
    """Convert atoms/cm^3 to atoms/µm^3."""
    return density_cm3 * 1e-12


def calibrate_c3(
    blockade_radius: float = REFERENCE_BLOCKADE_RADIUS,
    delta: float = REFERENCE_DETUNING,
    strength_margin: float = DEFAULT_STRENGTH_MARGIN,
) -> float:
    """Interaction coefficient C3 (MHz µm^3) for which ``blockade_radius`` is
    the distance where C3/d^3 equals ``strength_margin * delta``."""
    return strength_margin * delta * blockade_radius**3


DEFAULT_C3 = calibrate_c3()


@dataclass
class LossModel:
    """Squeezed ensemble of ``n_initial`` atoms of which ``n_lost`` are lost."""

    n_initial: int
    n_lost: int
    s_before: float

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.n_initial) != self.n_initial or self.n_initial < 1:
            raise ValueError(f"n_initial must be a positive integer, got {self.n_initial}")
        if int(self.n_lost) != self.n_lost or not 0 <= self.n_lost < self.n_initial:
            raise ValueError(
                f"n_lost must be an integer in [0, {self.n_initial}), got {self.n_lost}"
            )
        if not self.s_before >= 1:
            raise ValueError(f"s_before must be at least 1, got {self.s_before}")

    @property
    def loss_parameter(self) -> float:
        """n_L S / N, small when the losses are harmless."""
        return self.n_lost * self.s_before / self.n_initial


def variance_after_single_loss(variance: float, n_atoms: int) -> float:
    """Second moment of the transverse spin once one of ``n_atoms`` atoms is lost.

    Exact for permutation-symmetric states.
    """
    if n_atoms < 2:
        raise ValueError(f"Need at least 2 atoms to lose one, got {n_atoms}")
    return variance * (1 - 2 / n_atoms) + 0.25


def squeezing_after_losses(model: LossModel) -> float:
    """``S / (1 + n_L S / N)``."""
    return model.s_before / (1 + model.loss_parameter)


def squeezing_after_iterated_losses(model: LossModel) -> float:
    """Apply ``variance_after_single_loss`` once per lost atom, starting from
    the variance ``N / (4 S)``, and return ``((N - n_L)/4) / variance``."""
    n_atoms = model.n_initial
    variance = n_atoms / (4 * model.s_before)
    for _ in range(model.n_lost):
        variance = variance_after_single_loss(variance, n_atoms)
        n_atoms -= 1
    return (n_atoms / 4) / variance


def loss_is_negligible(model: LossModel, tolerance: float = NEGLIGIBLE_LOSS) -> bool:
    return model.loss_parameter <= tolerance


@dataclass
class TracedLossCheck:
    """Second moments before and after tracing one atom out of a product-space state."""

    n_atoms: int
    theta: float
    second_moment_before: float
    second_moment_after: float

    @property
    def predicted(self) -> float:
        return variance_after_single_loss(self.second_moment_before, self.n_atoms)

    @property
    def error(self) -> float:
        return abs(self.second_moment_after - self.predicted)


def traced_loss_check(
    state: DickeState, theta: float = SQUEEZING_AXIS, traced_site: int = 0
) -> TracedLossCheck:
    """Lose one atom of ``state`` by a partial trace in the 2^N product space.

    ``state`` must live on the ground manifold. The second moment of
    ``J_theta`` is computed before the loss on N atoms and after it on the
    N - 1 remaining ones.
    """
    basis = state.basis
    if basis.max_rydberg != 0:
        raise ValueError(
            f"The loss check needs a ground-manifold state, got max_rydberg={basis.max_rydberg}"
        )
    n_atoms = basis.n_atoms
    if n_atoms < 2:
        raise ValueError(f"Need at least 2 atoms to lose one, got {n_atoms}")

    def j_theta(n):
        j_x, j_y, _ = tensor_space.spin_components(n, local_dim=2)
        return np.cos(theta) * j_x - np.sin(theta) * j_y

    psi = tensor_space.symmetric_embedding(basis, local_dim=2) @ state.amplitudes
    j_full = j_theta(n_atoms)
    before = float(np.vdot(j_full @ psi, j_full @ psi).real)
    rho = tensor_space.reduced_density_matrix(psi, n_atoms, traced_site, local_dim=2)
    j_rest = j_theta(n_atoms - 1)
    after = tensor_space.expectation(j_rest @ j_rest, rho)
    return TracedLossCheck(
        n_atoms=n_atoms,
        theta=theta,
        second_moment_before=before,
        second_moment_after=after,
    )


class AdiabaticityRatios(NamedTuple):
    """Left over right sides of the three adiabatic-elimination conditions,
    multiplied by the required margin. Each must be at most 1."""

    pump: float
    stokes_1: float
    stokes_2: float

    @property
    def passed(self) -> bool:
        return max(self) <= 1

    def violations(self) -> List[str]:
        return [name for name, ratio in self._asdict().items() if ratio > 1]


def adiabaticity_check(
    n_atoms: int,
    s_target: float,
    omega0: float,
    omega1: float,
    omega2: float,
    delta: float,
    delta_prime: float,
    margin: float = 1.0,
) -> AdiabaticityRatios:
    """Ratios ``sqrt(N) Ω0 margin / Δ``, ``sqrt(S/4) Ω1 margin / (Δ + Δ')`` and
    ``sqrt(S/4) Ω2 margin / (Δ - Δ')``.

    The Rydberg amplitudes grow as sqrt(n_a) Ω0 and sqrt(n_b) Ω1,2 with
    n_b ~ S/4 at the target squeezing.
    """
    if delta == delta_prime:
        raise ValueError(f"delta and delta_prime must differ, both are {delta}")
    if n_atoms < 1 or s_target < 1 or delta <= 0 or margin < 1:
        raise ValueError(
            f"Need n_atoms >= 1, s_target >= 1, delta > 0 and margin >= 1, got "
            f"n_atoms={n_atoms}, s_target={s_target}, delta={delta}, margin={margin}"
        )
    stokes_scale = np.sqrt(s_target / 4) * margin
    return AdiabaticityRatios(
        pump=float(np.sqrt(n_atoms) * abs(omega0) * margin / delta),
        stokes_1=float(stokes_scale * abs(omega1) / abs(delta + delta_prime)),
        stokes_2=float(stokes_scale * abs(omega2) / abs(delta - delta_prime)),
    )


def squeezing_time(s_target: float, delta: float) -> float:
    """``(10^4 / 16) S ln(S) / Δ``: time to reach ``s_target`` when the
    adiabaticity conditions hold with a margin of 10. µs for Δ in MHz."""
    if not s_target > 1:
        raise ValueError(f"s_target must exceed 1, got {s_target}")
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    return 1e4 / 16 * s_target * np.log(s_target) / delta


def min_detuning(s_target: float, gamma: float) -> float:
    """Detuning scale ``Γ 10^2 S ln(S) / 4`` that Δ must greatly exceed for
    decay at rate ``gamma`` to be negligible during the squeezing time."""
    if not s_target > 1:
        raise ValueError(f"s_target must exceed 1, got {s_target}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    return gamma * 1e2 * s_target * np.log(s_target) / 4


def blockade_neighbors(
    c3: float,
    delta: float,
    strength_margin: float = DEFAULT_STRENGTH_MARGIN,
    density: float = density_from_cm3(DEFAULT_DENSITY_CM3),
):
    """Blockade radius ``d0 = (C3 / (margin Δ))^(1/3)`` and the mean number of
    atoms in the sphere of radius d0 at ``density``.

    Returns
    -------
    (d0, n)
    """
    radius = (c3 / (strength_margin * delta)) ** (1 / 3)
    return float(radius), float(density * 4 / 3 * np.pi * radius**3)


def expected_squeezing(n_neighbors: float) -> float:
    """Squeezing reachable when only ``n_neighbors`` atoms blockade each other."""
    return n_neighbors / 2


@dataclass
class FeasibilityReport:
    """Feasibility estimates at one operating point.

    Attributes
    ----------
    adiabaticity_margins: AdiabaticityRatios
        Must all be at most 1.
    squeezing_time: float
        Time to reach the target squeezing (µs).
    min_detuning: float
        Detuning scale set by the decay rate (MHz). ``delta`` should exceed
        it by a large factor; only ``delta <= min_detuning`` is flagged.
    blockade_radius: float
        d0 (µm).
    neighbor_count: float
        Atoms within d0 of a given atom.
    """

    delta: float
    s_target: float
    adiabaticity_margins: AdiabaticityRatios
    squeezing_time: float
    min_detuning: float
    blockade_radius: float
    neighbor_count: float
    violations: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.violations:
            self.violations = self.find_violations()

    def find_violations(self) -> List[str]:
        violations = list(self.adiabaticity_margins.violations())
        if self.delta <= self.min_detuning:
            violations.append("min_detuning")
        if self.s_target > expected_squeezing(self.neighbor_count):
            violations.append("neighbor_count")
        return violations

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        result = asdict(self)
        result["adiabaticity_margins"] = self.adiabaticity_margins._asdict()
        result["expected_squeezing"] = expected_squeezing(self.neighbor_count)
        return result


def feasibility_report(
    n_atoms: int,
    s_target: float,
    omega0: float,
    omega1: float,
    omega2: float,
    delta: float,
    delta_prime: float,
    gamma: float,
    c3: float = DEFAULT_C3,
    strength_margin: float = DEFAULT_STRENGTH_MARGIN,
    density: Optional[float] = None,
    adiabatic_margin: float = DEFAULT_ADIABATIC_MARGIN,
) -> FeasibilityReport:
    """Evaluate every feasibility estimate at one operating point.

    Frequencies in MHz (not angular), ``gamma`` included; ``density`` in
    atoms/µm^3, defaulting to 2e11 atoms/cm^3.
    """
    if density is None:
        density = density_from_cm3(DEFAULT_DENSITY_CM3)
    radius, neighbors = blockade_neighbors(c3, delta, strength_margin, density)
    report = FeasibilityReport(
        delta=delta,
        s_target=s_target,
        adiabaticity_margins=adiabaticity_check(
            n_atoms, s_target, omega0, omega1, omega2, delta, delta_prime, adiabatic_margin
        ),
        squeezing_time=squeezing_time(s_target, delta),
        min_detuning=min_detuning(s_target, gamma),
        blockade_radius=radius,
        neighbor_count=neighbors,
    )
    for name in report.violations:
        logger.warning("Feasibility condition violated: %s", name)
    return report
