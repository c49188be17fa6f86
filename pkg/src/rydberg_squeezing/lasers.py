"""Laser fields driving the a-r and b-r transitions.

Frequencies are angular (rad/µs) inside the package. Configuration values are
quoted in MHz and converted with ``to_angular``.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Tuple

import numpy as np

TRANSITIONS = ("a-r", "b-r")

# Phases (degrees) added to the two mirror Stokes fields, at -(Δ-Δ') and
# -(Δ+Δ') respectively.
PHASE_CONVENTIONS: Dict[str, Tuple[float, float]] = {
    "+-": (90.0, -90.0),
    "-+": (-90.0, 90.0),
    "++": (90.0, 90.0),
    "--": (-90.0, -90.0),
}
# Not one of the candidate conventions: mirror Stokes fields in phase with the
# originals.
UNSHIFTED_CONVENTION = "00"
_ALL_CONVENTIONS = {**PHASE_CONVENTIONS, UNSHIFTED_CONVENTION: (0.0, 0.0)}


def to_angular(frequency_mhz: float, angular_units: bool = False) -> float:
    """Convert a frequency quoted in MHz to rad/µs.

    With ``angular_units`` the number is already an angular frequency.
    """
    return float(frequency_mhz) if angular_units else 2 * np.pi * float(frequency_mhz)


def from_angular(frequency: float, angular_units: bool = False) -> float:
    return float(frequency) if angular_units else float(frequency) / (2 * np.pi)


@dataclass(frozen=True)
class Laser:
    """One monochromatic field.

    Attributes
    ----------
    transition: str
        ``"a-r"`` or ``"b-r"``.
    rabi: complex
        Full Rabi frequency. The field enters the Hamiltonian as
        ``(rabi/2) r†x e^{i detuning t} + h.c.``.
    detuning: float
        Detuning below the Rydberg level, so that the field alone shifts the
        ground level by ``-|rabi/2|^2 / detuning``.
    label: str
        Name used in reports.
    """

    transition: str
    rabi: complex
    detuning: float
    label: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.transition not in TRANSITIONS:
            raise ValueError(f"transition must be one of {TRANSITIONS}, got {self.transition!r}")
        if not np.isfinite(self.rabi):
            raise ValueError(f"rabi must be finite, got {self.rabi}")
        if not np.isfinite(self.detuning):
            raise ValueError(f"detuning must be finite, got {self.detuning}")

    @property
    def coupling(self) -> complex:
        """Single-atom matrix element ``rabi / 2``."""
        return complex(self.rabi) / 2

    @property
    def ground_level(self) -> str:
        return self.transition[0]

    @property
    def ladder(self) -> str:
        """Collective operator raising the ground atom to ``r``."""
        return f"r†{self.ground_level}"

    @classmethod
    def from_coupling(cls, transition: str, coupling: complex, detuning: float, label=""):
        return cls(
            transition=transition, rabi=2 * complex(coupling), detuning=detuning, label=label
        )

    def dephased(self, degrees: float) -> "Laser":
        return replace(self, rabi=complex(self.rabi) * np.exp(1j * np.deg2rad(degrees)))


@dataclass(frozen=True)
class LaserSet:
    """Lasers applied together, with the detuning defining the rotating frame."""

    lasers: Tuple[Laser, ...]
    reference_detuning: float
    phase_convention: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "lasers", tuple(self.lasers))
        self.validate()

    def validate(self):
        if not self.lasers:
            raise ValueError("A laser set needs at least one laser")
        if not np.isfinite(self.reference_detuning):
            raise ValueError(f"reference_detuning must be finite, got {self.reference_detuning}")

    def __len__(self):
        return len(self.lasers)

    def __iter__(self):
        return iter(self.lasers)

    def on_transition(self, transition: str) -> List[Laser]:
        return [laser for laser in self.lasers if laser.transition == transition]

    @property
    def has_pump(self) -> bool:
        return bool(self.on_transition("a-r"))

    def frame_frequencies(self) -> np.ndarray:
        """Oscillation frequency of each laser term in the rotating frame."""
        return np.array([laser.detuning - self.reference_detuning for laser in self.lasers])

    def max_frame_frequency(self) -> float:
        return float(np.max(np.abs(self.frame_frequencies())))

    def scaled(self, factor: float) -> "LaserSet":
        """Same lasers with all amplitudes multiplied by ``factor``."""
        return replace(
            self, lasers=tuple(replace(laser, rabi=laser.rabi * factor) for laser in self.lasers)
        )

    def shifted(self, offset: float) -> "LaserSet":
        """Same physics with the frame reference moved by ``offset``."""
        return replace(self, reference_detuning=self.reference_detuning + offset)


def standard_six_laser_set(
    delta: float,
    delta_prime: float,
    omega0: complex,
    omega1: complex,
    omega2: complex,
    phase_convention: str = "++",
    include_mirror: bool = True,
) -> LaserSet:
    """Pump and two Stokes fields, plus their mirror images at opposite detunings.

    Parameters
    ----------
    delta, delta_prime:
        Pump detuning Δ and Stokes offset Δ' (angular), with Δ > Δ' > 0.
    omega0, omega1, omega2:
        Single-atom matrix elements of the pump (a-r at Δ) and of the Stokes
        fields (b-r at Δ-Δ' and Δ+Δ').
    phase_convention:
        Key of ``PHASE_CONVENTIONS`` (or ``"00"``) giving the phases of the
        mirror Stokes fields. The mirror pump is never dephased.
    include_mirror:
        If False, return the original three lasers only.
    """
    if not delta > delta_prime:
        raise ValueError(f"Need delta > delta_prime, got delta={delta}, delta_prime={delta_prime}")
    if not delta_prime > 0:
        raise ValueError(f"delta_prime must be positive, got {delta_prime}")
    if phase_convention not in _ALL_CONVENTIONS:
        raise ValueError(
            f"Unknown phase convention {phase_convention!r}, expected one of "
            f"{sorted(_ALL_CONVENTIONS)}"
        )
    lasers = [
        Laser.from_coupling("a-r", omega0, delta, label="pump"),
        Laser.from_coupling("b-r", omega1, delta - delta_prime, label="stokes_1"),
        Laser.from_coupling("b-r", omega2, delta + delta_prime, label="stokes_2"),
    ]
    if include_mirror:
        phase_1, phase_2 = _ALL_CONVENTIONS[phase_convention]
        lasers += [
            Laser.from_coupling("a-r", omega0, -delta, label="mirror_pump"),
            Laser.from_coupling(
                "b-r", omega1, -(delta - delta_prime), label="mirror_stokes_1"
            ).dephased(phase_1),
            Laser.from_coupling(
                "b-r", omega2, -(delta + delta_prime), label="mirror_stokes_2"
            ).dephased(phase_2),
        ]
    return LaserSet(
        lasers=tuple(lasers),
        reference_detuning=delta,
        phase_convention=phase_convention if include_mirror else "",
    )


def single_laser_set(omega: complex, delta: float) -> LaserSet:
    """One a-r field of matrix element ``omega`` at detuning ``delta``."""
    pump = Laser.from_coupling("a-r", omega, delta, label="pump")
    return LaserSet(lasers=(pump,), reference_detuning=delta)
