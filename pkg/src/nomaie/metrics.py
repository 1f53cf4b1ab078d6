"""Spectral efficiency, energy efficiency and BER bookkeeping."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .codec import DomainError, index_bit_capacity

__all__ = [
    "SCHEMES",
    "SchemeSpec",
    "bits_per_subblock",
    "spectral_efficiency",
    "energy_efficiency",
    "ErrorCounts",
    "accumulate_ber",
    "table2_rows",
    "table2_csv",
]

SCHEMES = ("ofdm", "ofdm-noma", "ofdm-im", "im-noma", "noma-ie")


def _num(x):
    # keep rationals exact, let floats stay floats
    return Fraction(x) if isinstance(x, (int, Fraction)) else float(x)


def _log2_int(M: int) -> int:
    k = int(M).bit_length() - 1
    if M < 2 or 1 << k != M:
        raise DomainError(f"modulation order must be a power of two, got {M}")
    return k


@dataclass(frozen=True)
class SchemeSpec:
    """One row of the scheme comparison.

    For OMA schemes (``ofdm``, ``ofdm-im``) only ``K_F`` and ``M_F`` are read
    and stand for K and M. For ``im-noma`` the two K values are the
    independent per-user activation counts.
    """

    scheme: str
    L: int
    K_F: int
    K_N: int = 0
    M_F: int = 2
    M_N: int = 2
    N_T: int = 128
    Q: int = 16
    a_F: float | Fraction = Fraction(1)
    P_max: float | Fraction = Fraction(1)

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.L < 1 or self.N_T < 1 or self.Q < 0:
            raise DomainError("L, N_T must be positive and Q nonnegative")
        if self.N_T % self.L:
            raise DomainError(f"N_T={self.N_T} is not a multiple of L={self.L}")
        if self.scheme in ("ofdm", "ofdm-noma") and self.K_F != self.L:
            raise DomainError(f"{self.scheme} activates every subcarrier (K_F = L)")
        if self.scheme == "ofdm-noma" and self.K_N != self.L:
            raise DomainError("ofdm-noma needs K_F = K_N = L")
        if self.scheme == "noma-ie" and not 0 <= self.K_N <= self.K_F <= self.L:
            raise DomainError("noma-ie needs 0 <= K_N <= K_F <= L")
        if self.scheme == "im-noma" and not (0 < self.K_F <= self.L and 0 < self.K_N <= self.L):
            raise DomainError("im-noma needs 0 < K_u <= L")

    @property
    def multi_user(self) -> bool:
        return self.scheme in ("ofdm-noma", "im-noma", "noma-ie")

    def powers(self):
        """[(a_u, K_u)] for the users sharing the subblock."""
        if not self.multi_user:
            return [(Fraction(1), self.K_F)]
        a_f = _num(self.a_F)
        return [(a_f, self.K_F), (1 - a_f, self.K_N)]


def bits_per_subblock(spec: SchemeSpec) -> list[int]:
    """Data bits m_u each user carries per subblock."""
    s = spec
    if s.scheme == "ofdm":
        return [s.L * _log2_int(s.M_F)]
    if s.scheme == "ofdm-im":
        return [index_bit_capacity(s.L, s.K_F) + s.K_F * _log2_int(s.M_F)]
    if s.scheme == "ofdm-noma":
        return [s.L * _log2_int(s.M_F), s.L * _log2_int(s.M_N)]
    if s.scheme == "im-noma":
        return [
            index_bit_capacity(s.L, s.K_F) + s.K_F * _log2_int(s.M_F),
            index_bit_capacity(s.L, s.K_N) + s.K_N * _log2_int(s.M_N),
        ]
    return [
        index_bit_capacity(s.L, s.K_F) + s.K_F * _log2_int(s.M_F),
        index_bit_capacity(s.K_F, s.K_N) + s.K_N * _log2_int(s.M_N),
    ]


def spectral_efficiency(spec: SchemeSpec):
    """bits/s/Hz over one OFDM block including the cyclic prefix."""
    m = sum(bits_per_subblock(spec))
    return Fraction(spec.N_T, spec.L) * m / (spec.N_T + spec.Q)


def energy_efficiency(spec: SchemeSpec, policy: str = "max-power"):
    """bits/J per subblock under the given transmit-power policy."""
    m = sum(bits_per_subblock(spec))
    p_max = _num(spec.P_max)
    if policy == "max-power":
        used = sum(a * k for a, k in spec.powers())
        if used == 0:
            raise DomainError("no active subcarriers")
        return m / (p_max * used)
    if policy == "reallocation":
        return m / (spec.L * p_max)
    raise DomainError(f"unknown power policy {policy!r}")


@dataclass(frozen=True)
class ErrorCounts:
    """Running BER numerator/denominator for one user; adds like a monoid.

    ``errors_borrowed`` is signed: negative for bits lent to the other user.
    """

    bits: int = 0
    errors_case1: int = 0
    errors_case2: int = 0
    errors_borrowed: int = 0

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            self.bits + other.bits,
            self.errors_case1 + other.errors_case1,
            self.errors_case2 + other.errors_case2,
            self.errors_borrowed + other.errors_borrowed,
        )

    @property
    def errors(self) -> int:
        return self.errors_case1 + self.errors_case2 + self.errors_borrowed

    @property
    def ber(self) -> float:
        if self.bits <= 0:
            raise DomainError("no transmitted bits")
        return self.errors / self.bits

    def ci95(self) -> tuple[float, float]:
        """Normal-approximation interval on the error count."""
        half = 1.96 * math.sqrt(max(self.errors, 0)) / self.bits
        return max(self.ber - half, 0.0), self.ber + half


def accumulate_ber(counts: Iterable[ErrorCounts]) -> ErrorCounts:
    total = ErrorCounts()
    for c in counts:
        total = total + c
    if total.bits == 0:
        raise DomainError("no transmitted bits")
    return total


def _fmt(x) -> str:
    return repr(float(x))


def table2_rows(specs: Iterable[SchemeSpec]):
    return [
        (s.scheme, spectral_efficiency(s), energy_efficiency(s, "max-power"),
         energy_efficiency(s, "reallocation"))
        for s in specs
    ]


def table2_csv(specs: Iterable[SchemeSpec]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scheme", "SE", "EE_maxpower", "EE_realloc"])
    for name, se, ee_mp, ee_ra in table2_rows(specs):
        w.writerow([name, _fmt(se), _fmt(ee_mp), _fmt(ee_ra)])
    return buf.getvalue()
