"""Command line: ``rydberg-squeezing <mode> [--config FILE] [--set key=value ...]``.

Each mode writes its traces (CSV) and a ``key=value`` summary under
``output_path``. Exit status: 0 on success, 2 for an invalid configuration,
3 when a computation fails its numerical checks.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple
import argparse
import logging
import sys
import time

import numpy as np
import pandas

from . import __version__
from .blockade_model import (
    DEFAULT_PHASE_PER_STEP,
    BlockadeConfig,
    build_time_dependent_hamiltonian,
    evolve_blockade,
    max_stable_step,
)
from .config import AUDIT, MODES, RunConfig, build_config, defaults_applied, load_document
from .errors import NUMERICAL_ERRORS, ConfigError
from .evolution import SqueezingTrace
from .feasibility import (
    LossModel,
    density_from_cm3,
    feasibility_report,
    loss_is_negligible,
    squeezing_after_iterated_losses,
    squeezing_after_losses,
)
from .ideal_model import IdealConfig, IdealPrediction, evolve_ideal
from .lasers import LaserSet, standard_six_laser_set
from .perturbation_oracle import (
    TwoAtomModel,
    compare_light_shifts,
    coupling_report,
    four_photon_coupling,
    fourth_order_sum,
    light_shift_exact,
    pair_coupling_measure,
    perturbative_pair_coupling,
    phase_convention_audit,
)
from .spin_core import build_basis
from .traces import compare_traces, write_summary, write_trace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

ANALYTIC_WINDOW_POPULATION = 0.05
ANALYTIC_TOLERANCE = 0.15
MAX_RYDBERG_POPULATION = 0.1
EARLY_WINDOW_DEVIATION = 0.3


def _laser_frequencies(config: RunConfig) -> Tuple[float, ...]:
    return tuple(
        config.frequency(key)
        for key in ("delta_mhz", "delta_prime_mhz", "omega0_mhz", "omega1_mhz", "omega2_mhz")
    )


def _select_convention(config: RunConfig, num_workers: int) -> Tuple[str, Dict[str, Any]]:
    if config.phase_convention != AUDIT:
        return config.phase_convention, {}
    report = phase_convention_audit(*_laser_frequencies(config), num_workers=num_workers)
    selected = report.selected
    logger.info("Phase convention selected by the audit: %s", selected)
    return selected, {"audit": report.to_dict()}


def _six_laser_set(config: RunConfig, convention: str) -> LaserSet:
    return standard_six_laser_set(*_laser_frequencies(config), phase_convention=convention)


def _blockade_config(config: RunConfig, laser_set: LaserSet) -> BlockadeConfig:
    dt = config.dt_us
    if dt is None:
        hamiltonian = build_time_dependent_hamiltonian(build_basis(config.n_atoms, 1), laser_set)
        dt = min(max_stable_step(hamiltonian, DEFAULT_PHASE_PER_STEP), config.t_final_us)
    return BlockadeConfig(
        n_atoms=config.n_atoms,
        laser_set=laser_set,
        t_final=config.t_final_us,
        dt=dt,
        record_every=config.record_every or 1,
    )


def _trace_summary(trace: SqueezingTrace, prefix: str = "") -> Dict[str, Any]:
    s_max, t_max = trace.max_squeezing()
    return {
        f"{prefix}s_max": s_max,
        f"{prefix}t_s_max_us": t_max,
        f"{prefix}max_nr_mean": float(trace.nr_means.max()),
        f"{prefix}max_nb_mean": float(trace.nb_means.max()),
        f"{prefix}n_samples": len(trace),
    }


def _analytic_window(trace: SqueezingTrace, n_atoms: int, omega_eff: float) -> Dict[str, Any]:
    prediction = IdealPrediction(n_atoms=n_atoms, omega_eff=omega_eff)
    inside = trace.nb_means < ANALYTIC_WINDOW_POPULATION * n_atoms
    times = trace.times[inside]
    s_error = np.abs(trace.s_factors[inside] / prediction.s_analytic(times) - 1)
    nb_analytic = prediction.nb_analytic(times)
    populated = nb_analytic > 0
    nb_error = np.abs(trace.nb_means[inside][populated] / nb_analytic[populated] - 1)
    deviation = float(max(s_error.max(initial=0), nb_error.max(initial=0)))
    return {
        "analytic_window_end_us": float(times[-1]),
        "analytic_window_max_deviation": deviation,
        "analytic_window_ok": deviation <= ANALYTIC_TOLERANCE,
    }


def run_ideal(config: RunConfig, progress: bool = False, num_workers: int = 1):
    if config.n_steps is None:
        ideal = IdealConfig.with_automatic_steps(
            config.n_atoms, config.omega_eff, config.t_final_us
        )
    else:
        ideal = IdealConfig(config.n_atoms, config.omega_eff, config.t_final_us, config.n_steps)
    trace = evolve_ideal(ideal, progress=progress)
    summary = _trace_summary(trace)
    summary["s_max_over_half_n"] = summary["s_max"] / (config.n_atoms / 2)
    summary.update(_analytic_window(trace, config.n_atoms, config.omega_eff))
    return {"trace": trace}, summary


def run_blockade(config: RunConfig, progress: bool = False, num_workers: int = 1):
    convention, extra = _select_convention(config, num_workers)
    laser_set = _six_laser_set(config, convention)
    trace = evolve_blockade(_blockade_config(config, laser_set), progress=progress)
    summary = {"phase_convention": convention, **_trace_summary(trace), **extra}
    summary["nr_ok"] = summary["max_nr_mean"] <= MAX_RYDBERG_POPULATION
    return {"trace": trace}, summary


def run_fig3(config: RunConfig, progress: bool = False, num_workers: int = 1):
    """Six-laser evolution next to the ideal model with the perturbative coupling."""
    convention, extra = _select_convention(config, num_workers)
    laser_set = _six_laser_set(config, convention)
    six_lasers = evolve_blockade(_blockade_config(config, laser_set), progress=progress)

    omega_c = perturbative_pair_coupling(laser_set)
    omega_eff = -omega_c.real / 2
    if omega_eff == 0:
        raise ValueError(f"The {convention!r} laser set has no pair coupling along -pi/4")
    ideal = evolve_ideal(
        IdealConfig.with_automatic_steps(config.n_atoms, omega_eff, config.t_final_us),
        progress=progress,
    )
    s_max = six_lasers.max_squeezing()[0]
    early = ideal.times[ideal.nb_means < ANALYTIC_WINDOW_POPULATION * config.n_atoms]
    comparison = compare_traces(six_lasers, ideal, window=(0.0, float(early[-1])))
    summary = {
        "phase_convention": convention,
        "omega_c": omega_c,
        "omega_eff": omega_eff,
        **_trace_summary(six_lasers),
        **_trace_summary(ideal, prefix="ideal_"),
        "early_window": comparison.to_dict(),
        "early_window_ok": comparison.max_relative_deviation <= EARLY_WINDOW_DEVIATION,
        "s_max_ok": s_max >= config.n_atoms / 2,
        "nr_ok": float(six_lasers.nr_means.max()) <= MAX_RYDBERG_POPULATION,
        **extra,
    }
    return {"six_lasers": six_lasers, "ideal": ideal}, summary


def run_oracle(config: RunConfig, progress: bool = False, num_workers: int = 1):
    """Light-shift cancellation, pair coupling and phase-convention audit."""
    delta, delta_prime, omega0, omega1, omega2 = _laser_frequencies(config)
    u_int = config.u_int_ratio * delta
    n_atoms = config.n_atoms

    exact = light_shift_exact(n_atoms, omega0, delta, u_int)
    table = pandas.DataFrame(
        {
            "n_a": exact.n_a,
            "exact": exact.shifts,
            "fourth_order": fourth_order_sum(n_atoms, omega0, delta, u_int),
        }
    )
    light_shift = compare_light_shifts(n_atoms, omega0, delta, u_int)
    free_light_shift = compare_light_shifts(n_atoms, omega0, delta, 0.0)

    three_lasers = standard_six_laser_set(
        delta, delta_prime, omega0, omega1, omega2, include_mirror=False
    )
    coupling = coupling_report(TwoAtomModel(three_lasers, u_int))
    unblockaded = pair_coupling_measure(TwoAtomModel(three_lasers, 0.0))
    reference = four_photon_coupling(delta, delta_prime, omega0, omega1, omega2)
    audit = phase_convention_audit(
        delta, delta_prime, omega0, omega1, omega2, u_int=np.inf, num_workers=num_workers
    )
    summary = {
        "light_shift_quadratic": light_shift.to_dict(),
        "light_shift_quadratic_no_interaction": free_light_shift.to_dict(),
        "pair_coupling": coupling.to_dict(),
        "pair_coupling_formula": reference,
        "unblockaded_transfer_ratio": abs(unblockaded.omega_c) / abs(reference),
        "audit": audit.to_dict(),
        "audit_selected": audit.selected if audit.accepted else None,
    }
    return {"light_shifts": table}, summary


def run_loss(config: RunConfig, progress: bool = False, num_workers: int = 1):
    model = LossModel(config.n_atoms, config.n_lost, config.s_before)
    return {}, {
        "s_before": model.s_before,
        "s_after": squeezing_after_losses(model),
        "s_after_iterated": squeezing_after_iterated_losses(model),
        "loss_parameter": model.loss_parameter,
        "loss_negligible": loss_is_negligible(model),
    }


def run_feasibility(config: RunConfig, progress: bool = False, num_workers: int = 1):
    """The feasibility estimates take the MHz numbers as quoted."""
    report = feasibility_report(
        n_atoms=config.n_atoms,
        s_target=config.s_target,
        omega0=config.omega0_mhz,
        omega1=config.omega1_mhz,
        omega2=config.omega2_mhz,
        delta=config.delta_mhz,
        delta_prime=config.delta_prime_mhz,
        gamma=config.gamma_khz / 1000,
        c3=config.c3_calibration,
        strength_margin=config.strength_margin,
        density=density_from_cm3(config.density_cm3),
    )
    summary = report.to_dict()
    summary["min_detuning_mhz"] = summary.pop("min_detuning")
    summary["feasible"] = report.feasible
    return {}, summary


RUNNERS = {
    "ideal": run_ideal,
    "blockade": run_blockade,
    "oracle": run_oracle,
    "loss": run_loss,
    "feasibility": run_feasibility,
    "fig3": run_fig3,
}


def run(
    config: RunConfig,
    progress: bool = False,
    num_workers: int = 1,
    defaults: Sequence[str] = (),
) -> Dict[str, Path]:
    """Run ``config`` and write its outputs. Return the written files by name."""
    echo = config.model_dump()
    echo["unit_note"] = config.unit_note
    echo["defaults_applied"] = list(defaults)
    start = time.time()
    outputs, summary = RUNNERS[config.mode](config, progress=progress, num_workers=num_workers)
    written = {}
    for name, output in outputs.items():
        path = config.output_file(f"{name}.csv")
        if isinstance(output, SqueezingTrace):
            written[name] = write_trace(output, path, config=echo)
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            output.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
            written[name] = path
    summary.update(
        mode=config.mode,
        version=__version__,
        unit_note=config.unit_note,
        defaults_applied=list(defaults),
        rng_seed=config.rng_seed,
        wall_time_s=round(time.time() - start, 3),
    )
    written["summary"] = write_summary(summary, config.output_file("summary.txt"))
    logger.info("Wrote %s", ", ".join(str(path) for path in written.values()))
    return written


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one configuration key (repeatable)",
    )
    common.add_argument("--workers", type=int, default=1, help="Processes for the audit")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--no-progress", action="store_true")
    parser = argparse.ArgumentParser(prog="rydberg-squeezing", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        subparsers.add_parser(mode, parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        document = load_document(args.config, args.set, mode=args.mode)
        config = build_config(document)
    except ConfigError as error:
        print(f"configuration error: {error}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    try:
        run(
            config,
            progress=not args.no_progress,
            num_workers=args.workers,
            defaults=defaults_applied(document),
        )
    except NUMERICAL_ERRORS as error:
        print(f"numerical failure: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except ValueError as error:
        print(f"invalid parameters: {error}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
