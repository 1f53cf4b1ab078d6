"""Superposition coding, power allocation and the per-subcarrier Rayleigh channel.

Everything is modelled in the frequency domain: with i.i.d. fading per
subcarrier the IFFT/CP/FFT chain leaves the per-subcarrier statistics
unchanged, so it is skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codec import DomainError, SubblockGeometry

__all__ = [
    "PowerAllocation",
    "AmplitudeTriple",
    "amplitude_levels",
    "superpose",
    "draw_channel",
    "draw_noise",
    "receive",
    "power_reallocation_scale",
    "db_to_linear",
    "linear_to_db",
    "snr_db_to_n0",
]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


def snr_db_to_n0(snr_db: float, p_max: float = 1.0) -> float:
    """Noise density for a transmit SNR ``P_max / N_0`` given in dB."""
    return float(p_max / db_to_linear(snr_db))


@dataclass(frozen=True)
class PowerAllocation:
    a_F: float
    a_N: float | None = None
    P_max: float = 1.0

    def __post_init__(self):
        if self.a_N is None:
            object.__setattr__(self, "a_N", 1.0 - self.a_F)
        if abs(self.a_F + self.a_N - 1.0) > 1e-12:
            raise DomainError(f"a_F + a_N must be 1, got {self.a_F} + {self.a_N}")
        if not self.a_F > self.a_N > 0:
            raise DomainError(f"a_F must exceed a_N > 0, got a_F={self.a_F}, a_N={self.a_N}")
        if self.P_max <= 0:
            raise DomainError("P_max must be positive")

    @property
    def alpha_F(self) -> float:
        return math.sqrt(self.a_F * self.P_max)

    @property
    def alpha_N(self) -> float:
        return math.sqrt(self.a_N * self.P_max)

    def scaled(self, amplitude_scale: float) -> "PowerAllocation":
        """Same split with every amplitude multiplied by ``amplitude_scale``."""
        return PowerAllocation(self.a_F, self.a_N, self.P_max * amplitude_scale**2)


@dataclass(frozen=True)
class AmplitudeTriple:
    lam_minus: float
    lam_star: float
    lam_plus: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.lam_minus, self.lam_star, self.lam_plus)


def amplitude_levels(alloc: PowerAllocation) -> AmplitudeTriple:
    """Amplitudes a superimposed FU-active subcarrier can take."""
    a_f, a_n = alloc.alpha_F, alloc.alpha_N
    return AmplitudeTriple(a_f - a_n, a_f, a_f + a_n)


def superpose(x_F: np.ndarray, x_N: np.ndarray, alloc: PowerAllocation) -> np.ndarray:
    x_F = np.asarray(x_F)
    x_N = np.asarray(x_N)
    if x_F.shape != x_N.shape:
        raise DomainError(f"subblock shapes differ: {x_F.shape} vs {x_N.shape}")
    return alloc.alpha_F * x_F + alloc.alpha_N * x_N


def _cn(rng: np.random.Generator, var: float, shape) -> np.ndarray:
    s = math.sqrt(var / 2.0)
    return s * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def draw_channel(L: int, omega: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Rayleigh gains with E|h|^2 = omega; shape (L,) or (size, L)."""
    if omega <= 0:
        raise DomainError(f"average channel gain must be positive, got {omega}")
    return _cn(rng, omega, (L,) if size is None else (size, L))


def draw_noise(L: int, n0: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """CN(0, n0) noise samples; shape (L,) or (size, L)."""
    if n0 <= 0:
        raise DomainError(f"noise density must be positive, got {n0}")
    return _cn(rng, n0, (L,) if size is None else (size, L))


def receive(x: np.ndarray, h: np.ndarray, w: np.ndarray) -> np.ndarray:
    x, h, w = np.asarray(x), np.asarray(h), np.asarray(w)
    if x.shape != h.shape or h.shape != w.shape:
        raise DomainError(f"shape mismatch: x{x.shape}, h{h.shape}, w{w.shape}")
    return x * h + w


def power_reallocation_scale(alloc: PowerAllocation | float, geometry: SubblockGeometry) -> float:
    """Amplitude factor that brings the mean subblock energy back to L * P_max.

    ``alloc`` may also be a bare FU fraction, which admits the degenerate
    single-user splits (a_F = 1) that ``PowerAllocation`` rejects.
    """
    if isinstance(alloc, PowerAllocation):
        a_f, a_n = alloc.a_F, alloc.a_N
    else:
        a_f, a_n = float(alloc), 1.0 - float(alloc)
    used = a_f * geometry.K_F + a_n * geometry.K_N
    if used <= 0:
        raise DomainError("no active subcarriers")
    return math.sqrt(geometry.L / used)
