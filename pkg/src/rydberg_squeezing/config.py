"""Run configurations of the command line.

A configuration is a JSON object. ``mode`` selects the computation and the
defaults of ``MODE_DEFAULTS[mode]`` fill in the keys it leaves out::

    {"mode": "fig3", "n_atoms": 10, "t_final_us": 100}

Frequencies are quoted in MHz (``*_mhz`` keys) and converted to rad/µs with
a 2 pi factor, unless ``angular_units`` is set.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Mapping, Optional, Tuple, Union
import json

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .feasibility import DEFAULT_C3, DEFAULT_DENSITY_CM3, DEFAULT_STRENGTH_MARGIN
from .lasers import PHASE_CONVENTIONS, UNSHIFTED_CONVENTION, to_angular
from .perturbation_oracle import MAX_EXACT_ATOMS

MODES = ("ideal", "blockade", "oracle", "loss", "feasibility", "fig3")
AUDIT = "audit"
UNIT_NOTE = "frequencies in MHz are multiplied by 2 pi to give rad/us; times in us"
ANGULAR_UNIT_NOTE = "frequencies are angular (rad/us) as given; times in us"

_SIX_LASERS = {
    "delta_mhz": 50.0,
    "delta_prime_mhz": 20.0,
    "omega0_mhz": 1.1,
    "omega1_mhz": 1.1,
    "omega2_mhz": 1.1,
}

MODE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "ideal": {"n_atoms": 20},
    "blockade": {
        "n_atoms": 20,
        **_SIX_LASERS,
        "phase_convention": AUDIT,
        "t_final_us": 50.0,
        "record_every": 1,
    },
    "oracle": {"n_atoms": 4, **_SIX_LASERS, "u_int_ratio": 100.0},
    "loss": {"n_atoms": 100, "s_before": 10.0, "n_lost": 10},
    "feasibility": {
        "n_atoms": 20,
        **_SIX_LASERS,
        "s_target": 10.0,
        "gamma_khz": 10.0,
        "density_cm3": DEFAULT_DENSITY_CM3,
        "c3_calibration": DEFAULT_C3,
        "strength_margin": DEFAULT_STRENGTH_MARGIN,
    },
    "fig3": {
        "n_atoms": 20,
        **_SIX_LASERS,
        "phase_convention": AUDIT,
        "t_final_us": 250.0,
        "record_every": 1,
    },
}

REQUIRED_KEYS: Dict[str, Tuple[str, ...]] = {
    "ideal": ("n_atoms", "omega_eff", "t_final_us"),
    "blockade": ("n_atoms", *_SIX_LASERS, "phase_convention", "t_final_us"),
    "oracle": ("n_atoms", *_SIX_LASERS, "u_int_ratio"),
    "loss": ("n_atoms", "s_before", "n_lost"),
    "feasibility": ("n_atoms", *_SIX_LASERS, "s_target", "gamma_khz"),
    "fig3": ("n_atoms", *_SIX_LASERS, "phase_convention", "t_final_us"),
}

_POSITIVE = (
    "delta_mhz",
    "delta_prime_mhz",
    "t_final_us",
    "dt_us",
    "gamma_khz",
    "density_cm3",
    "c3_calibration",
    "strength_margin",
)


class RunConfig(BaseModel):
    """A validated run configuration. Keys absent from the mode stay None."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: Literal["ideal", "blockade", "oracle", "loss", "feasibility", "fig3"]
    n_atoms: Optional[int] = None
    delta_mhz: Optional[float] = None
    delta_prime_mhz: Optional[float] = None
    omega0_mhz: Optional[float] = None
    omega1_mhz: Optional[float] = None
    omega2_mhz: Optional[float] = None
    phase_convention: Optional[str] = None
    t_final_us: Optional[float] = None
    dt_us: Optional[float] = None
    record_every: Optional[int] = None
    gamma_khz: Optional[float] = None
    s_target: Optional[float] = None
    s_before: Optional[float] = None
    n_lost: Optional[int] = None
    density_cm3: Optional[float] = None
    c3_calibration: Optional[float] = None
    strength_margin: Optional[float] = None
    omega_eff: Optional[float] = None
    n_steps: Optional[int] = None
    u_int_ratio: Optional[float] = None
    angular_units: bool = False
    output_path: str = "rydberg_output"
    rng_seed: int = 0

    @field_validator("n_atoms", "record_every", "n_steps")
    @classmethod
    def _at_least_one(cls, value):
        if value is not None and value < 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator(*_POSITIVE)
    @classmethod
    def _positive(cls, value):
        if value is not None and not value > 0:
            raise ValueError(f"must be positive, got {value}")
        return value

    @field_validator("omega0_mhz", "omega1_mhz", "omega2_mhz", "omega_eff")
    @classmethod
    def _finite(cls, value):
        if value is not None and not np.isfinite(value):
            raise ValueError(f"must be finite, got {value}")
        return value

    @field_validator("n_lost")
    @classmethod
    def _non_negative(cls, value):
        if value is not None and value < 0:
            raise ValueError(f"must be non-negative, got {value}")
        return value

    @field_validator("u_int_ratio")
    @classmethod
    def _non_negative_ratio(cls, value):
        if value is not None and not value >= 0:
            raise ValueError(f"must be non-negative, got {value}")
        return value

    @field_validator("s_target")
    @classmethod
    def _above_one(cls, value):
        if value is not None and not value > 1:
            raise ValueError(f"must exceed 1, got {value}")
        return value

    @field_validator("s_before")
    @classmethod
    def _at_least_coherent(cls, value):
        if value is not None and not value >= 1:
            raise ValueError(f"must be at least 1, got {value}")
        return value

    @field_validator("phase_convention")
    @classmethod
    def _known_convention(cls, value):
        allowed = (AUDIT, UNSHIFTED_CONVENTION, *PHASE_CONVENTIONS)
        if value is not None and value not in allowed:
            raise ValueError(f"must be one of {list(allowed)}, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_mode(self):
        for key in REQUIRED_KEYS[self.mode]:
            if getattr(self, key) is None:
                raise ConfigError(key, f"required in mode {self.mode!r}")
        if self.delta_mhz is not None and self.delta_prime_mhz is not None:
            if not self.delta_mhz > self.delta_prime_mhz:
                raise ConfigError(
                    "delta_prime_mhz",
                    f"must be below delta_mhz={self.delta_mhz}, got {self.delta_prime_mhz}",
                )
        if self.n_lost is not None and not self.n_lost < self.n_atoms:
            raise ConfigError("n_lost", f"must be below n_atoms={self.n_atoms}, got {self.n_lost}")
        if self.mode == "oracle" and self.n_atoms > MAX_EXACT_ATOMS:
            raise ConfigError(
                "n_atoms", f"at most {MAX_EXACT_ATOMS} in mode 'oracle', got {self.n_atoms}"
            )
        return self

    @property
    def unit_note(self) -> str:
        return ANGULAR_UNIT_NOTE if self.angular_units else UNIT_NOTE

    def frequency(self, key: str) -> float:
        """The value of a ``*_mhz`` key in rad/µs."""
        return to_angular(getattr(self, key), self.angular_units)

    def output_file(self, suffix: str) -> Path:
        return Path(self.output_path) / f"{self.mode}_{suffix}"


def _ideal_defaults(values: Dict[str, Any]) -> Dict[str, Any]:
    """Run the ideal model long enough to pass the maximal squeezing."""
    n_atoms, omega_eff = values.get("n_atoms"), values.get("omega_eff")
    if values.get("t_final_us") is not None or not n_atoms or not omega_eff:
        return {}
    try:
        t_final = np.log(max(float(n_atoms), 2.0)) / (2 * float(n_atoms) * abs(float(omega_eff)))
    except (TypeError, ValueError):
        return {}
    return {"t_final_us": float(t_final)}


def defaults_applied(document: Mapping[str, Any]) -> List[str]:
    """Keys that ``build_config`` fills in for ``document``."""
    mode = document.get("mode")
    defaults = dict(MODE_DEFAULTS.get(mode, {}))
    if mode == "ideal":
        defaults.update(_ideal_defaults({**defaults, **document}))
    return sorted(key for key in defaults if document.get(key) is None)


def _as_config_error(error: ValidationError) -> ConfigError:
    first = error.errors()[0]
    original = (first.get("ctx") or {}).get("error")
    if isinstance(original, ConfigError):
        return original
    key = ".".join(str(part) for part in first["loc"]) or "config"
    message = first["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, ") :]
    return ConfigError(key, message)


def build_config(document: Mapping[str, Any]) -> RunConfig:
    """Apply the mode defaults to ``document`` and validate it.

    Raises
    ------
    ConfigError
        Naming the first offending key.
    """
    if not isinstance(document, Mapping):
        raise ConfigError("config", f"expected a JSON object, got {type(document).__name__}")
    if document.get("mode") is None:
        raise ConfigError("mode", f"required, one of {list(MODES)}")
    if document["mode"] not in MODES:
        raise ConfigError("mode", f"must be one of {list(MODES)}, got {document['mode']!r}")
    values = {key: value for key, value in document.items() if value is not None}
    for key, value in MODE_DEFAULTS[document["mode"]].items():
        values.setdefault(key, value)
    if document["mode"] == "ideal":
        values.update(_ideal_defaults(values))
    try:
        return RunConfig(**values)
    except ValidationError as error:
        raise _as_config_error(error) from error


def parse_config(text: str) -> RunConfig:
    """Parse a JSON configuration document."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ConfigError("config", f"invalid JSON ({error})") from error
    return build_config(document)


def render_config(config: RunConfig) -> str:
    """Canonical JSON of ``config``: ``parse_config(render_config(c)) == c``."""
    return json.dumps(config.model_dump(exclude_none=True), sort_keys=True, indent=2)


def parse_override(text: str) -> Tuple[str, Any]:
    """Split ``key=value``. The value is read as JSON, or kept as a string."""
    key, separator, raw = text.partition("=")
    if not separator or not key:
        raise ConfigError(text, "overrides are written key=value")
    try:
        return key.strip(), json.loads(raw)
    except json.JSONDecodeError:
        return key.strip(), raw


def load_document(
    path: Optional[Union[str, Path]] = None,
    overrides: Iterable[str] = (),
    mode: Optional[str] = None,
) -> Dict[str, Any]:
    """Merge a configuration file, ``key=value`` overrides and the mode.

    Overrides take precedence over the file. ``mode`` (the subcommand) must
    agree with the file when both give one.
    """
    document: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r") as f:
                document = json.load(f)
        except OSError as error:
            raise ConfigError("config", f"cannot read {path} ({error})") from error
        except json.JSONDecodeError as error:
            raise ConfigError("config", f"invalid JSON in {path} ({error})") from error
        if not isinstance(document, dict):
            raise ConfigError("config", f"{path} does not hold a JSON object")
    for text in overrides:
        key, value = parse_override(text)
        document[key] = value
    if mode is not None:
        if document.get("mode", mode) != mode:
            raise ConfigError(
                "mode", f"the configuration is for {document['mode']!r}, not {mode!r}"
            )
        document["mode"] = mode
    return document
