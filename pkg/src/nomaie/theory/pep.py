"""Pairwise error probabilities of a two-subcarrier element over Rayleigh fading.

Fading powers enter the integrals as unit-mean exponentials u, with the mean
gain Omega pulled out as a factor sqrt(Omega) on the Q argument; that is the
same as integrating the raw kernel against Exp(Omega) densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from ..codec import DomainError, SubblockGeometry
from ..phy import PowerAllocation, amplitude_levels, db_to_linear, snr_db_to_n0
from .quad import integrate_exp, q_function

__all__ = [
    "TheoryInputs",
    "TsePepTable",
    "pep_conventional",
    "pep_symbol",
    "pep_index_pair",
    "pep_index_fu",
    "pep_index_fu_conditional_x",
    "pep_index_high_power",
    "tse_pep_table",
]

SIDES = ("fu", "sic")


@dataclass(frozen=True)
class TheoryInputs:
    """Everything the analytic BER formulas depend on.

    ``omega_F`` and ``omega_N`` are linear mean channel gains. ``q_closed``
    picks the Q-function used inside the closed forms, ``q_integral`` the one
    used inside the numerical integrals ('approx' or 'exact').
    """

    a_F: float
    beta_e: float
    n0: float
    omega_F: float = float(db_to_linear(-6.0))
    omega_N: float = 1.0
    P_max: float = 1.0
    geometry: SubblockGeometry = field(default_factory=lambda: SubblockGeometry(2, 1, 1))
    delta_m_N: int = 0
    q_closed: str = "approx"
    q_integral: str = "exact"

    def __post_init__(self):
        if not (self.n0 > 0 and self.omega_F > 0 and self.omega_N > 0):
            raise DomainError("noise density and channel gains must be positive")
        if not self.beta_e > 0:
            raise DomainError(f"beta_e must be positive, got {self.beta_e}")
        q_function(self.q_closed)
        q_function(self.q_integral)
        PowerAllocation(self.a_F, P_max=self.P_max)
        if not 0 <= self.p1 <= 1:
            raise DomainError(
                f"cannot borrow {self.delta_m_N} of {self.geometry.fu_index_bits} FU index bits"
            )

    @classmethod
    def from_snr(cls, a_F: float, snr_db: float, beta_e: float | None = None,
                 omega_F_db: float = -6.0, omega_N_db: float = 0.0, **kw) -> "TheoryInputs":
        """Build inputs from a transmit SNR in dB; ``beta_e=None`` means the feasible value."""
        p_max = kw.get("P_max", 1.0)
        if beta_e is None:
            alloc = PowerAllocation(a_F, P_max=p_max)
            beta_e = (alloc.alpha_F - alloc.alpha_N) / alloc.alpha_F
        return cls(a_F=a_F, beta_e=beta_e, n0=snr_db_to_n0(snr_db, p_max),
                   omega_F=float(db_to_linear(omega_F_db)),
                   omega_N=float(db_to_linear(omega_N_db)), **kw)

    @property
    def alloc(self) -> PowerAllocation:
        return PowerAllocation(self.a_F, P_max=self.P_max)

    @property
    def levels(self) -> tuple[float, float, float]:
        """(lambda_minus, lambda_star, lambda_plus)."""
        return amplitude_levels(self.alloc).as_tuple()

    @property
    def b(self) -> float:
        """FU hypothesis amplitude used by the envelope detectors."""
        return self.beta_e * self.alloc.alpha_F

    @property
    def p1(self) -> float:
        n = self.geometry.fu_index_bits
        if n == 0:
            return 0.0
        return self.delta_m_N / n

    @property
    def q1(self) -> float:
        return 1.0 / (4.0 * self.n0)

    @property
    def q2(self) -> float:
        return 1.0 / (3.0 * self.n0)

    def omega(self, side: str) -> float:
        if side == "fu":
            return self.omega_F
        if side == "sic":
            return self.omega_N
        raise DomainError(f"side must be one of {SIDES}, got {side!r}")


def pep_conventional(lam: float, omega: float, n0: float, policy: str = "approx") -> float:
    """Rayleigh-averaged Q(sqrt(2 lam^2 |h|^2 / N0)) with E|h|^2 = omega."""
    if lam < 0 or omega <= 0 or n0 <= 0:
        raise DomainError("need lam >= 0, omega > 0, n0 > 0")
    g = omega * lam * lam / n0
    if policy == "approx":
        return (1.0 / 12.0) / (g + 1.0) + 0.25 / (4.0 * g / 3.0 + 1.0)
    if policy == "exact":
        return 0.5 * (1.0 - math.sqrt(g / (1.0 + g)))
    raise DomainError(f"unknown Q-function policy {policy!r}")


def pep_symbol(lam: float, omega: float, n0: float, policy: str = "approx") -> float:
    """Symbol-only error on one active subcarrier; same law as plain OFDM."""
    return pep_conventional(lam, omega, n0, policy)


def pep_index_pair(lam: float, omega: float, n0: float, policy: str = "approx") -> float:
    """E Q(sqrt(lam^2 (|h_1|^2 + |h_2|^2) / (2 N0))): swap of one active slot, no interference.

    The 'approx' branch is the determinant form with A = diag(lam^2, lam^2).
    """
    if lam < 0 or omega <= 0 or n0 <= 0:
        raise DomainError("need lam >= 0, omega > 0, n0 > 0")
    if policy == "approx":
        d1 = (omega * lam * lam / (4.0 * n0) + 1.0) ** 2
        d2 = (omega * lam * lam / (3.0 * n0) + 1.0) ** 2
        return (1.0 / 12.0) / d1 + 0.25 / d2
    if policy == "exact":
        # two-branch Rayleigh MRC with per-branch mean SNR g
        g = omega * lam * lam / (4.0 * n0)
        mu = math.sqrt(g / (1.0 + g))
        return ((1.0 - mu) / 2.0) ** 2 * (2.0 + mu)
    raise DomainError(f"unknown Q-function policy {policy!r}")


def pep_index_high_power(inputs: TheoryInputs, side: str = "fu") -> float:
    """Index-error PEP once the NU interference is negligible (a_F close to 1)."""
    return pep_index_pair(inputs.levels[1], inputs.omega(side), inputs.n0, "approx")


def _kernel_params(lam: float, inputs: TheoryInputs, side: str):
    b = inputs.b
    s = math.sqrt(2.0 * inputs.omega(side) / inputs.n0)
    return lam - 0.5 * b, 0.5 * b, s


def _u_scale(a: float, c: float, s: float) -> float:
    # fading power at which s * max|coef| * sqrt(u) reaches about one
    m = max(abs(a), abs(c), 1e-12)
    return 0.05 / (s * m) ** 2


@lru_cache(maxsize=4096)
def _pep_index_cond(lam: float, x: float, inputs: TheoryInputs, side: str) -> float:
    a, c, s = _kernel_params(lam, inputs, side)
    q = q_function(inputs.q_integral, scalar=True)
    cx = c * x

    def f(u):
        tot = u + x
        if tot <= 0.0:
            return 0.5
        return q(s * (a * u + cx) / math.sqrt(tot))

    extra = (-cx / a,) if a < 0 else ()
    return integrate_exp(f, _u_scale(a, c, s), extra, what="P_I(lambda, x)")


def pep_index_fu_conditional_x(lam: float, x: float, inputs: TheoryInputs, side: str = "fu") -> float:
    """Index-error PEP given the fading power x (unit mean) of the shared inactive subcarrier.

    Integrates Q(sqrt(2 Omega / N0) (a u + c x) / sqrt(u + x)) against e^{-u},
    with a = lam - b/2, c = b/2 and b = beta_e * alpha_F.
    """
    if x < 0:
        raise DomainError(f"fading power must be nonnegative, got {x}")
    return _pep_index_cond(float(lam), float(x), inputs, side)


@lru_cache(maxsize=1024)
def _pep_index_fu(lam: float, inputs: TheoryInputs, side: str) -> float:
    a, c, s = _kernel_params(lam, inputs, side)
    return integrate_exp(
        lambda x: _pep_index_cond(lam, x, inputs, side),
        _u_scale(a, c, s), what="P_I(lambda)",
    )


def pep_index_fu(lam: float, inputs: TheoryInputs, side: str = "fu") -> float:
    """Unconditional index-error PEP: the conditional form averaged over x as well."""
    inputs.omega(side)
    return _pep_index_fu(float(lam), inputs, side)


@dataclass(frozen=True)
class TsePepTable:
    """Per-amplitude-level symbol and index PEPs of one receiver side."""

    inputs: TheoryInputs
    side: str
    levels: tuple[float, float, float]
    p_symbol: tuple[float, float, float]
    p_index: tuple[float, float, float]

    def conditional(self, level: int, x: float) -> float:
        return pep_index_fu_conditional_x(self.levels[level], x, self.inputs, self.side)


def tse_pep_table(inputs: TheoryInputs, side: str = "fu") -> TsePepTable:
    om = inputs.omega(side)
    lv = inputs.levels
    ps = tuple(pep_symbol(l, om, inputs.n0, inputs.q_closed) for l in lv)
    pi = tuple(pep_index_fu(l, inputs, side) for l in lv)
    return TsePepTable(inputs, side, lv, ps, pi)
