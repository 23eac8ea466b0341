"""Proactive secure coded caching for device-to-device delivery.

Ramp secret sharing of files over GF(2^L), periodic share renewal, group key
agreement over a simulated broadcast channel, and exact privacy checks.
"""

from .errors import (
    CapacityError,
    ConfigurationError,
    InsufficientSharesError,
    LedgerViolation,
    MixedEpochError,
    ProcacheError,
    ProtocolError,
)
from .field import GF2m, field_for
from .kernels import BACKEND
from .protocol import FaultHooks, Simulation, SystemConfig, parse_config
from .ramp import RampParams, derive_ramp_params

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CapacityError",
    "ConfigurationError",
    "FaultHooks",
    "GF2m",
    "InsufficientSharesError",
    "LedgerViolation",
    "MixedEpochError",
    "ProcacheError",
    "ProtocolError",
    "RampParams",
    "Simulation",
    "SystemConfig",
    "derive_ramp_params",
    "field_for",
    "parse_config",
]
