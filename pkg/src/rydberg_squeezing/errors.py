"""Exceptions raised by the simulation and verification routines.

Invalid arguments raise the built-in ``ValueError``. The classes below mark
failures that callers (in particular the command line) handle separately.
"""


class InvalidStateError(ValueError):
    """A state vector is not normalized or does not match its basis."""


class StepSizeError(ValueError):
    """The requested time step is too coarse for the Hamiltonian."""


class IntegrationError(RuntimeError):
    """The integrated state drifted away from unit norm."""


class AmbiguousBranchError(RuntimeError):
    """No dressed eigenstate could be matched to a bare state."""


class UnreliableFitError(RuntimeError):
    """A fit to simulated data has a residual above its threshold."""


class ConfigError(ValueError):
    """A run configuration is malformed. ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


NUMERICAL_ERRORS = (
    InvalidStateError,
    StepSizeError,
    IntegrationError,
    AmbiguousBranchError,
    UnreliableFitError,
)
