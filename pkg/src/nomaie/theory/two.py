"""BER of the two-subcarrier subblock with one active subcarrier per user."""

from __future__ import annotations

from ..codec import DomainError, SubblockGeometry
from .pep import TheoryInputs, pep_conventional, pep_index_fu, pep_symbol

__all__ = ["ber_fu_two", "sic_error_prob_two", "ber_nu_two"]

_TWO = SubblockGeometry(2, 1, 1)


def _require_two(inputs: TheoryInputs) -> None:
    if inputs.geometry != _TWO:
        raise DomainError(f"two-subcarrier formulas need geometry (2, 1, 1), got {inputs.geometry}")


def _outer_levels(inputs: TheoryInputs):
    lam_minus, _, lam_plus = inputs.levels
    return lam_minus, lam_plus


def ber_fu_two(inputs: TheoryInputs) -> float:
    """(1 / 2 m_F) sum over lambda_-, lambda_+ of P_S + 3 P_I.

    The 3 counts bits: a pattern swap always costs the index bit and loses
    the symbol bit half the time, and there are two swapped hypotheses.
    """
    _require_two(inputs)
    m_F = inputs.geometry.m_F
    tot = 0.0
    for lam in _outer_levels(inputs):
        tot += pep_symbol(lam, inputs.omega_F, inputs.n0, inputs.q_closed)
        tot += 3.0 * pep_index_fu(lam, inputs, "fu")
    return tot / (2 * m_F)


def sic_error_prob_two(inputs: TheoryInputs, x_N: int = 1) -> float:
    """Union bound on a wrong FU subblock at the NU given its own symbol x_N.

    The FU symbol is equally likely to add to or subtract from x_N, so the
    value is the same for both signs.
    """
    _require_two(inputs)
    if x_N not in (1, -1):
        raise DomainError(f"x_N must be +1 or -1, got {x_N}")
    om = inputs.omega_N
    tot = 0.0
    for lam in _outer_levels(inputs):
        tot += pep_symbol(lam, om, inputs.n0, inputs.q_closed)
        tot += 2.0 * pep_index_fu(lam, inputs, "sic")
    return min(0.5 * tot, 1.0)


def ber_nu_two(inputs: TheoryInputs, perfect_sic: bool = False) -> float:
    """0.5 P_e,SIC plus the post-SIC BPSK error weighted by correct SIC."""
    _require_two(inputs)
    p_c = pep_conventional(inputs.alloc.alpha_N, inputs.omega_N, inputs.n0, inputs.q_closed)
    if perfect_sic:
        return p_c
    p_sic = {x: sic_error_prob_two(inputs, x) for x in (1, -1)}
    p_e = 0.5 * (p_sic[1] + p_sic[-1])
    return 0.5 * p_e + 0.5 * sum((1.0 - p) * p_c for p in p_sic.values())
