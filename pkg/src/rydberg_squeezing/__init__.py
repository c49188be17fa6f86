"""Spin squeezing of atomic ensembles by Rydberg-blockaded four-photon transitions."""

__version__ = "0.1.0"

from .spin_core import (
    DickeBasis,
    DickeState,
    build_basis,
    coherent_state,
    observables,
    squeezing,
)
from .evolution import SqueezingSample, SqueezingTrace
from .ideal_model import IdealConfig, IdealPrediction, evolve_ideal, evolve_one_axis
from .lasers import Laser, LaserSet, standard_six_laser_set
from .blockade_model import BlockadeConfig, evolve_blockade, single_laser_run
from .perturbation_oracle import (
    TwoAtomModel,
    light_shift_exact,
    pair_coupling_measure,
    phase_convention_audit,
)
from .feasibility import LossModel, feasibility_report, squeezing_after_losses
from .traces import compare_traces, read_trace, write_trace
from .config import RunConfig, parse_config, render_config

__all__ = [
    "DickeBasis",
    "DickeState",
    "build_basis",
    "coherent_state",
    "observables",
    "squeezing",
    "SqueezingSample",
    "SqueezingTrace",
    "IdealConfig",
    "IdealPrediction",
    "evolve_ideal",
    "evolve_one_axis",
    "Laser",
    "LaserSet",
    "standard_six_laser_set",
    "BlockadeConfig",
    "evolve_blockade",
    "single_laser_run",
    "TwoAtomModel",
    "light_shift_exact",
    "pair_coupling_measure",
    "phase_convention_audit",
    "LossModel",
    "feasibility_report",
    "squeezing_after_losses",
    "compare_traces",
    "read_trace",
    "write_trace",
    "RunConfig",
    "parse_config",
    "render_config",
]
