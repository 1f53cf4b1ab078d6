"""Analytic BER of NOMA-IE: PEPs, quadrature and error-bit accounting."""

from .four import (
    SwapOutcome,
    ber_fu_four,
    ber_nu_four,
    block_correct_prob_four,
    conditional_symbol_pep,
    configurations,
    error_bits_fu_four,
    error_bits_nu_four,
    index_correct_prob_four,
    index_error_prob_four,
    sic_error_prob_four,
    swap_outcomes,
)
from .pep import (
    TheoryInputs,
    TsePepTable,
    pep_conventional,
    pep_index_fu,
    pep_index_fu_conditional_x,
    pep_index_high_power,
    pep_index_pair,
    pep_symbol,
    tse_pep_table,
)
from .quad import QuadratureError, q_approx, q_exact
from .two import ber_fu_two, ber_nu_two, sic_error_prob_two

__all__ = [
    "QuadratureError",
    "q_exact",
    "q_approx",
    "TheoryInputs",
    "TsePepTable",
    "tse_pep_table",
    "pep_conventional",
    "pep_symbol",
    "pep_index_pair",
    "pep_index_fu",
    "pep_index_fu_conditional_x",
    "pep_index_high_power",
    "ber_fu_two",
    "sic_error_prob_two",
    "ber_nu_two",
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
