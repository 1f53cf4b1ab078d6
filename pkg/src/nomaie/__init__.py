"""NOMA with index-modulated envelopes: codec, channel, detectors, BER theory and simulation."""

from .codec import (
    DecodeError,
    DomainError,
    EnvelopeCodec,
    IndexModCodec,
    SubblockGeometry,
)
from .detection import DetectorConfig, detect, error_floor_exists, feasible_beta
from .metrics import ErrorCounts, SchemeSpec, energy_efficiency, spectral_efficiency
from .phy import PowerAllocation, amplitude_levels
from .sim import BerCurve, ScenarioConfig, run_benchmark, run_sweep, run_trial

__version__ = "0.1.0"

__all__ = [
    "DecodeError",
    "DomainError",
    "EnvelopeCodec",
    "IndexModCodec",
    "SubblockGeometry",
    "DetectorConfig",
    "detect",
    "error_floor_exists",
    "feasible_beta",
    "ErrorCounts",
    "SchemeSpec",
    "energy_efficiency",
    "spectral_efficiency",
    "PowerAllocation",
    "amplitude_levels",
    "BerCurve",
    "ScenarioConfig",
    "run_benchmark",
    "run_sweep",
    "run_trial",
]
