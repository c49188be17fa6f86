from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple
import multiprocessing

import numpy as np
import pandas
from tqdm.auto import tqdm

from .errors import InvalidStateError
from .spin_core import (
    HARD_NORM_TOLERANCE,
    DickeBasis,
    DickeState,
    observables,
    squeezing_from_observables,
)

TRACE_COLUMNS = ["t_us", "S", "nb_mean", "nr_mean", "norm"]


@dataclass
class SqueezingSample:
    """
    Squeezing and populations of the evolving state at one time.

    Attributes
    ----------
    t: float
        Time (µs for the laser-driven model, the inverse unit of omega_eff for
        the ideal model).
    s_factor: float
        S = (N/4) / <J_{-pi/4}^2>.
    nb_mean: float
        Mean number of atoms in b.
    nr_mean: float
        Mean number of Rydberg excitations.
    norm: float
        Squared norm of the state vector.
    mean_spin: tuple
        (<J_x>, <J_y>, <J_z>).
    theta_min: float
        Axis of minimal transverse variance.
    s_optimal: float
        Squeezing on that axis.
    """

    t: float
    s_factor: float
    nb_mean: float
    nr_mean: float
    norm: float
    mean_spin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    theta_min: float = 0.0
    s_optimal: float = 1.0

    @classmethod
    def from_state(cls, t: float, state: DickeState) -> "SqueezingSample":
        spin = observables(state)
        metrics = squeezing_from_observables(spin)
        return cls(
            t=float(t),
            s_factor=metrics.s_factor,
            nb_mean=spin.n_b_mean,
            nr_mean=spin.rydberg_population,
            norm=state.norm,
            mean_spin=tuple(float(x) for x in spin.mean_spin),
            theta_min=metrics.theta_min,
            s_optimal=metrics.s_optimal,
        )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_row(self) -> dict:
        return {
            "t_us": self.t,
            "S": self.s_factor,
            "nb_mean": self.nb_mean,
            "nr_mean": self.nr_mean,
            "norm": self.norm,
        }


@dataclass
class SqueezingTrace:
    """Time series of squeezing samples plus a metadata block.

    ``final_state`` holds the state at the last sample when the trace was
    produced by an evolver.
    """

    samples: List[SqueezingSample]
    metadata: Dict[str, Any] = field(default_factory=dict)
    final_state: Optional[DickeState] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        times = self.times
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("Trace times must be strictly increasing")
        for sample in self.samples:
            if abs(sample.norm - 1) > HARD_NORM_TOLERANCE:
                raise InvalidStateError(
                    f"Trace row at t={sample.t} has norm {sample.norm:.9f}"
                )

    def __len__(self):
        return len(self.samples)

    @property
    def times(self) -> np.ndarray:
        return np.array([sample.t for sample in self.samples])

    @property
    def s_factors(self) -> np.ndarray:
        return np.array([sample.s_factor for sample in self.samples])

    @property
    def nb_means(self) -> np.ndarray:
        return np.array([sample.nb_mean for sample in self.samples])

    @property
    def nr_means(self) -> np.ndarray:
        return np.array([sample.nr_mean for sample in self.samples])

    @property
    def norms(self) -> np.ndarray:
        return np.array([sample.norm for sample in self.samples])

    def max_squeezing(self) -> Tuple[float, float]:
        """Return ``(S_max, t(S_max))``."""
        index = int(np.argmax(self.s_factors))
        return float(self.s_factors[index]), float(self.times[index])

    def to_dataframe(self) -> pandas.DataFrame:
        return pandas.DataFrame(
            [sample.to_row() for sample in self.samples], columns=TRACE_COLUMNS
        )


class EvolverBase(ABC):
    """Common driver of the time evolutions.

    Subclasses yield ``(t, amplitudes)`` at the times to record; the base class
    turns them into samples and traces.
    """

    basis: DickeBasis
    label: str = "evolution"

    @abstractmethod
    def _iter_states(self, initial: DickeState) -> Iterator[Tuple[float, np.ndarray]]:
        """Iterate over the recorded ``(t, amplitudes)`` pairs, starting at t=0."""
        raise NotImplementedError

    def _check_initial(self, initial: DickeState):
        if initial.basis != self.basis:
            raise InvalidStateError(
                f"Initial state lives in {initial.basis}, the evolution in {self.basis}"
            )
        initial.validate()

    def iter_samples(
        self, initial: DickeState, progress: bool = False, total: Optional[int] = None
    ) -> Iterator[Tuple[SqueezingSample, DickeState]]:
        """Iterate over ``(sample, state)`` pairs along the trajectory."""
        self._check_initial(initial)
        states = self._iter_states(initial)
        for t, amplitudes in tqdm(states, total=total, disable=not progress, desc=self.label):
            state = DickeState(self.basis, amplitudes, norm_tolerance=HARD_NORM_TOLERANCE)
            yield SqueezingSample.from_state(t, state), state

    def run(
        self,
        initial: DickeState,
        progress: bool = False,
        metadata: Optional[Dict[str, Any]] = None,
    ) -> SqueezingTrace:
        """Evolve ``initial`` and return the recorded trace."""
        samples, state = [], initial
        for sample, state in self.iter_samples(initial, progress=progress, total=self.n_records):
            samples.append(sample)
        return SqueezingTrace(samples=samples, metadata=dict(metadata or {}), final_state=state)

    @property
    def n_records(self) -> Optional[int]:
        return None


def run_in_parallel(
    process_fn: Callable[[Any], Any],
    items: Iterable[Any],
    num_workers: int = 1,
    ordered_results: bool = True,
) -> List[Any]:
    """Apply ``process_fn`` to each item, in worker processes when
    ``num_workers > 1``.

    Each item is an independent run (one trajectory, one laser phase
    convention, ...). With ``ordered_results`` the results follow the order of
    the items, so they do not depend on the number of workers.
    """
    items = list(items)
    if num_workers <= 1 or len(items) <= 1:
        return [process_fn(item) for item in items]
    with multiprocessing.Pool(num_workers) as pool:
        if ordered_results:
            return list(pool.imap(process_fn, items))
        return list(pool.imap_unordered(process_fn, items))
