"""BER of larger subblocks through two-subcarrier elements (TSEs).

With one inactive FU subcarrier per subblock (L = K_F + 1), every
single-step index error swaps one active subcarrier k for the inactive one.
Pair k of (active subcarrier k, inactive subcarrier) is the k-th TSE; all
TSEs share the inactive subcarrier, so their conditional PEPs are coupled
through its fading power x, which is integrated out last.

Per-amplitude-vector results are averaged over the equiprobable transmit
configurations: FU pattern, NU pattern inside it, and whether each NU symbol
adds to or subtracts from the FU symbol below it.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from ..codec import DomainError, EnvelopeCodec
from .pep import (
    TheoryInputs,
    _kernel_params,
    _pep_index_cond,
    _u_scale,
    pep_conventional,
    pep_index_pair,
    pep_symbol,
)
from .quad import integrate_exp_vec

__all__ = [
    "SwapOutcome",
    "swap_outcomes",
    "configurations",
    "block_correct_prob_four",
    "index_error_prob_four",
    "index_correct_prob_four",
    "conditional_symbol_pep",
    "error_bits_fu_four",
    "ber_fu_four",
    "sic_error_prob_four",
    "error_bits_nu_four",
    "ber_nu_four",
]

FORMS = ("corrected", "printed")


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class SwapOutcome:
    """What happens when TSE k flips: the detected pattern and symbol alignment."""

    k: int                 # 0-based rank of the active subcarrier that is lost
    detected: tuple        # detected FU index set
    detected_rank: int     # its row in the FU pattern list
    index_bit_errors: int  # Hamming distance of the FU index bits
    sync: tuple            # 0-based symbol ranks that stay on their subcarrier

    @property
    def n_unsync(self) -> int:
        return len(self.detected) - len(self.sync)


def _codec(inputs: TheoryInputs) -> EnvelopeCodec:
    g = inputs.geometry
    if g.L != g.K_F + 1:
        raise DomainError(f"TSE formulas need exactly one inactive FU subcarrier, got {g}")
    return EnvelopeCodec.for_geometry(g)


def swap_outcomes(codec: EnvelopeCodec, pattern: int) -> list[SwapOutcome]:
    """All single-TSE index errors of FU pattern ``pattern`` (a row of the pattern list)."""
    I = codec.fu_patterns[pattern]
    (idle,) = set(range(1, codec.geometry.L + 1)) - set(I)
    out = []
    for k in range(len(I)):
        I_hat = tuple(sorted(set(I) - {I[k]} | {idle}))
        try:
            p_hat = codec.fu_patterns.index(I_hat)
        except ValueError:
            raise DomainError(f"swap {I} -> {I_hat} leaves the mapping table") from None
        sync = tuple(r for r in range(len(I)) if I_hat[r] == I[r])
        out.append(SwapOutcome(k, I_hat, p_hat, _popcount(pattern ^ p_hat), sync))
    return out


def configurations(inputs: TheoryInputs):
    """Equiprobable (FU pattern, NU pattern, amplitude vector c_F) triples.

    c_F lists the superimposed amplitude on each FU-active subcarrier in
    ascending subcarrier order.
    """
    codec = _codec(inputs)
    lam_minus, lam_star, lam_plus = inputs.levels
    K_N = inputs.geometry.K_N
    out = []
    for p, I in enumerate(codec.fu_patterns):
        for r, J in enumerate(codec.nu_patterns[p]):
            for signs in product((lam_minus, lam_plus), repeat=K_N):
                amp = dict(zip(J, signs))
                out.append((p, r, tuple(amp.get(g, lam_star) for g in I)))
    return out


@lru_cache(maxsize=256)
def _tse_integrals(c_list: tuple, inputs: TheoryInputs, side: str):
    """For each c in c_list: (block correct, index correct, per-k index error, printed SIC term).

    One vector quadrature over x covers every requested amplitude vector.
    """
    om = inputs.omega(side)
    levels = sorted({c for cs in c_list for c in cs})
    ps = {l: pep_symbol(l, om, inputs.n0, inputs.q_closed) for l in levels}
    K = len(c_list[0])

    def f(x):
        pi = {l: _pep_index_cond(l, x, inputs, side) for l in levels}
        rows = []
        for cs in c_list:
            two_pi = np.array([2.0 * pi[c] for c in cs])
            s = np.array([ps[c] for c in cs])
            block = np.prod(1.0 - two_pi - s)
            no_idx = np.prod(1.0 - two_pi)
            per_k = [two_pi[k] * np.prod(np.delete(1.0 - two_pi, k)) for k in range(K)]
            printed = np.prod(two_pi + s)
            rows.append([block, no_idx, *per_k, printed])
        return np.array(rows).ravel()

    scale = min(_u_scale(*_kernel_params(l, inputs, side)) for l in levels)
    v = integrate_exp_vec(f, scale, what="TSE product").reshape(len(c_list), K + 3)
    return {cs: (v[i, 0], v[i, 1], tuple(v[i, 2:2 + K]), v[i, -1]) for i, cs in enumerate(c_list)}


def _one(c_F, inputs: TheoryInputs, side: str):
    c = tuple(float(v) for v in c_F)
    if len(c) == 0:
        raise DomainError("empty amplitude vector")
    return _tse_integrals((c,), inputs, side)[c]


def block_correct_prob_four(c_F, inputs: TheoryInputs, side: str = "fu") -> float:
    """int e^{-x} prod_k (1 - 2 P_I(c_k, x) - P_S(c_k)) dx."""
    return float(_one(c_F, inputs, side)[0])


def index_correct_prob_four(c_F, inputs: TheoryInputs, side: str = "fu") -> float:
    """int e^{-x} prod_k (1 - 2 P_I(c_k, x)) dx: no TSE flips its pattern."""
    return float(_one(c_F, inputs, side)[1])


def index_error_prob_four(k: int, c_F, inputs: TheoryInputs, side: str = "fu") -> float:
    """Probability that TSE k (0-based) alone flips: 2 P_I(c_k, x) prod_{j != k}(1 - 2 P_I(c_j, x))."""
    per_k = _one(c_F, inputs, side)[2]
    if not 0 <= k < len(per_k):
        raise DomainError(f"TSE index {k} out of range for K_F={len(per_k)}")
    return float(per_k[k])


def conditional_symbol_pep(c_F, sync, errored, n_unsync: int, inputs: TheoryInputs,
                           form: str = "corrected", side: str = "fu") -> float:
    """Probability of one particular detected symbol vector.

    ``sync`` are the 0-based ranks of symbols that stay aligned with their
    subcarrier, ``errored`` the subset of those detected wrongly, and each of
    the ``n_unsync`` misaligned symbols is a coin flip. The 'corrected' form
    weights a correct synchronized symbol with 1 - P_S; 'printed' reproduces
    the published product P_S(c_i) * P_S(1 - c_j).
    """
    sync, errored = set(sync), set(errored)
    if not errored <= sync:
        raise DomainError("erroneous symbols must be a subset of the synchronized ones")
    if n_unsync < 0 or any(not 0 <= i < len(c_F) for i in sync):
        raise DomainError("inconsistent synchronized/unsynchronized partition")
    om, n0, pol = inputs.omega(side), inputs.n0, inputs.q_closed
    val = 0.5 ** n_unsync
    if form == "corrected":
        for i in sync - errored:
            val *= 1.0 - pep_symbol(c_F[i], om, n0, pol)
        for j in errored:
            val *= pep_symbol(c_F[j], om, n0, pol)
    elif form == "printed":
        for i in sync - errored:
            val *= pep_symbol(c_F[i], om, n0, pol)
        for j in errored:
            val *= pep_symbol(abs(1.0 - c_F[j]), om, n0, pol)
    else:
        raise DomainError(f"form must be one of {FORMS}")
    return val


def _symbol_bits_expected(c_F, sync, n_unsync, inputs, form, side="fu") -> float:
    """sum over detected symbol vectors of Pr(s_hat) * Hamming(s, s_hat).

    Only the synchronized symbols can be matched bit by bit; each
    misaligned one is wrong half the time, so it adds its 0.5 directly.
    """
    sync = tuple(sync)
    tot = 0.0
    for flips in product((0, 1), repeat=len(sync)):
        errored = [r for r, f in zip(sync, flips) if f]
        if not errored:
            continue
        p = conditional_symbol_pep(c_F, sync, errored, 0, inputs, form, side)
        tot += p * len(errored)
    return tot + 0.5 * n_unsync


def _mean(vals) -> float:
    return float(np.mean(vals))


def error_bits_fu_four(inputs: TheoryInputs, form: str = "corrected"):
    """Average FU error bits per subblock: (m_e1, m_e2, delta m_e1).

    m_e1  index-error case: every bit wrong in a subblock whose pattern flipped
    m_e2  symbol-only case
    delta m_e1  index-bit errors handed over with the lent bits (negative)
    """
    codec = _codec(inputs)
    configs = configurations(inputs)
    c_list = tuple(sorted({c for _, _, c in configs}))
    tab = _tse_integrals(c_list, inputs, "fu")
    K = inputs.geometry.K_F
    e1, e2, de1 = [], [], []
    for p, _, c in configs:
        _, p_ic, per_k, _ = tab[c]
        m1 = d1 = 0.0
        for sw in swap_outcomes(codec, p):
            pk = per_k[sw.k]
            m1 += pk * (_symbol_bits_expected(c, sw.sync, sw.n_unsync, inputs, form)
                        + sw.index_bit_errors)
            d1 += pk * sw.index_bit_errors
        e1.append(m1)
        e2.append(p_ic * _symbol_bits_expected(c, range(K), 0, inputs, form))
        de1.append(-inputs.p1 * d1)
    return _mean(e1), _mean(e2), _mean(de1)


def ber_fu_four(inputs: TheoryInputs, form: str = "corrected") -> float:
    m1, m2, d1 = error_bits_fu_four(inputs, form)
    return (m1 + m2 + d1) / (inputs.geometry.m_F - inputs.delta_m_N)


def sic_error_prob_four(c_F, inputs: TheoryInputs, form: str = "corrected") -> float:
    """Probability that E-SIC gets the FU subblock wrong at the NU.

    'corrected' is 1 - (block-correct probability under Omega_N); 'printed'
    integrates the product of per-TSE error terms as published.
    """
    r = _one(c_F, inputs, "sic")
    if form == "corrected":
        return float(1.0 - r[0])
    if form == "printed":
        return float(r[3])
    raise DomainError(f"form must be one of {FORMS}")


def _nu_index_error_bits(codec: EnvelopeCodec, p: int, r: int) -> float:
    others = [q for q in range(len(codec.nu_patterns[p])) if q != r]
    if not others:
        return 0.0
    return _mean([_popcount(r ^ q) for q in others])


def error_bits_nu_four(inputs: TheoryInputs):
    """Average NU error bits per subblock after a correct SIC: (m_e1, m_e2)."""
    codec = _codec(inputs)
    g = inputs.geometry
    om, n0 = inputs.omega_N, inputs.n0
    alpha_N = inputs.alloc.alpha_N
    p_c = pep_conventional(alpha_N, om, n0, inputs.q_closed)
    p_ie = 2.0 * pep_index_pair(alpha_N, om, n0, inputs.q_closed) if g.nu_index_bits else 0.0
    # expected Hamming weight of K_N independent BPSK decisions
    sym = sum(
        sum(f) * np.prod([p_c if b else 1.0 - p_c for b in f])
        for f in product((0, 1), repeat=g.K_N)
    )
    e1 = []
    for p, r, _ in configurations(inputs):
        e1.append(p_ie * (0.5 * g.K_N + _nu_index_error_bits(codec, p, r)))
    return _mean(e1), (1.0 - p_ie) * float(sym)


def ber_nu_four(inputs: TheoryInputs, perfect_sic: bool = False, form: str = "corrected") -> float:
    """Approximate NU BER: wrong SIC costs half of the NU bits, otherwise the post-SIC errors."""
    codec = _codec(inputs)
    g = inputs.geometry
    m1, m2 = error_bits_nu_four(inputs)
    if perfect_sic:
        # lent bits ride on the FU pattern, which a genie SIC always gets right
        return (m1 + m2) / (g.m_N + inputs.delta_m_N)
    configs = configurations(inputs)
    c_list = tuple(sorted({c for _, _, c in configs}))
    tab = _tse_integrals(c_list, inputs, "sic")
    p_sic, de1 = [], []
    for p, _, c in configs:
        block, _, per_k, printed = tab[c]
        p_sic.append(1.0 - block if form == "corrected" else printed)
        de1.append(inputs.p1 * sum(per_k[sw.k] * sw.index_bit_errors
                                   for sw in swap_outcomes(codec, p)))
    pe = min(_mean(p_sic), 1.0)
    return (0.5 * g.m_N * pe + (1.0 - pe) * (m1 + m2) + _mean(de1)) / (g.m_N + inputs.delta_m_N)
