"""Joint ML detection of NOMA-IE subblocks: E-SIC, E-detection and FU detection.

All detectors work on batches: ``y`` and ``h`` have shape ``(T, L)`` (a single
subblock of shape ``(L,)`` is promoted). They return indices into the
precomputed realization sets held by :class:`DetectorConfig`; ties go to the
lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import DomainError, EnvelopeCodec, IndexModCodec
from .phy import PowerAllocation

__all__ = [
    "DetectorConfig",
    "DetectionResult",
    "feasible_beta",
    "error_floor_exists",
    "ml_scan",
    "e_sic_detect",
    "sic_subtract",
    "e_detect_nu",
    "fu_detect",
    "detect",
    "count_bit_errors",
]


def feasible_beta(alloc: PowerAllocation) -> float:
    """Envelope detection coefficient that removes the error floor."""
    return (alloc.alpha_F - alloc.alpha_N) / alloc.alpha_F


def error_floor_exists(alloc: PowerAllocation, beta_e: float) -> bool:
    if not 0 < beta_e < 2:
        raise DomainError(f"beta_e must lie in (0, 2), got {beta_e}")
    return alloc.alpha_F <= 2.0 * alloc.alpha_N / (2.0 - beta_e)


@dataclass(frozen=True)
class DetectorConfig:
    """Envelope detection coefficient plus the realization sets to search.

    chi_F      [nF, L]       all legal FU subblocks (unit-amplitude BPSK / 0)
    fu_pattern [nF]          FU pattern rank of each row of chi_F
    chi_N      [nP, nN, L]   NU subblocks conditioned on each FU pattern
    fu_support [nP, L]       active-subcarrier mask of each FU pattern
    nested     whether the NU search is restricted to the detected FU set
    """

    beta_e: float
    chi_F: np.ndarray
    fu_pattern: np.ndarray
    chi_N: np.ndarray
    fu_support: np.ndarray
    nested: bool = True

    def __post_init__(self):
        if not self.beta_e > 0:
            raise DomainError(f"beta_e must be positive, got {self.beta_e}")
        if len(self.chi_F) == 0 or self.chi_N.shape[1] == 0:
            raise DomainError("empty realization set")

    @classmethod
    def from_codec(cls, codec: EnvelopeCodec, beta_e: float) -> "DetectorConfig":
        chi_f, _, pat = codec.fu_realizations
        chi_n, _, _ = codec.nu_realizations
        L = codec.geometry.L
        support = np.zeros((len(codec.fu_patterns), L), dtype=bool)
        for p, s in enumerate(codec.fu_patterns):
            support[p, np.asarray(s, dtype=int) - 1] = True
        return cls(beta_e, chi_f, pat, chi_n, support, nested=True)

    @classmethod
    def from_index_codecs(cls, fu: IndexModCodec, nu: IndexModCodec, beta_e: float) -> "DetectorConfig":
        """Independent per-user patterns (IM-NOMA): the NU set does not depend on the FU pattern."""
        chi_f, _, pat = fu.realizations
        chi_n, _, _ = nu.realizations
        n_pat = len(fu.patterns)
        chi_n = np.broadcast_to(chi_n, (n_pat,) + chi_n.shape)
        support = np.ones((n_pat, fu.L), dtype=bool)
        return cls(beta_e, chi_f, pat, chi_n, support, nested=False)


@dataclass
class DetectionResult:
    fu_idx: np.ndarray   # FU-side detection of the FU subblock
    sic_idx: np.ndarray  # NU-side (E-SIC) detection of the FU subblock
    nu_idx: np.ndarray   # NU subblock, index into chi_N[pattern of sic_idx]


def _batch(a) -> np.ndarray:
    a = np.asarray(a)
    return a[None, :] if a.ndim == 1 else a


def ml_scan(y, h, amplitude: float, chi: np.ndarray, mask=None) -> np.ndarray:
    """argmin_x sum_gamma |y - amplitude * h * x|^2 over the rows of a real ``chi``.

    Expanded as amplitude^2 |h|^2 x^2 - 2 amplitude Re(h* y) x, dropping the
    x-independent |y|^2 term, so the scan is two matrix products.
    """
    y, h = _batch(y), _batch(h)
    r = np.real(np.conj(h) * y)
    g = np.abs(h) ** 2
    if mask is not None:
        r = r * mask
        g = g * mask
    metric = amplitude**2 * (g @ (chi**2).T) - 2.0 * amplitude * (r @ chi.T)
    return np.argmin(metric, axis=1)


def e_sic_detect(y_N, h_N, config: DetectorConfig, alloc: PowerAllocation) -> np.ndarray:
    """NU-side joint detection of the FU subblock with the scaled amplitude beta_e * alpha_F."""
    return ml_scan(y_N, h_N, config.beta_e * alloc.alpha_F, config.chi_F)


def fu_detect(y_F, h_F, config: DetectorConfig, alloc: PowerAllocation) -> np.ndarray:
    """FU detection, treating the NU signal as interference."""
    return ml_scan(y_F, h_F, config.beta_e * alloc.alpha_F, config.chi_F)


def sic_subtract(y_N, x_hat_F, h_N, alloc: PowerAllocation) -> np.ndarray:
    # full alpha_F here; beta_e only scales the detection hypotheses
    return _batch(y_N) - alloc.alpha_F * _batch(x_hat_F) * _batch(h_N)


def e_detect_nu(y_sic, h_N, fu_pattern_hat, config: DetectorConfig, alloc: PowerAllocation) -> np.ndarray:
    """NU detection over realizations consistent with the detected FU pattern.

    The metric only runs over subcarriers in that pattern when the scheme
    nests the NU set inside the FU set.
    """
    y_sic, h_N = _batch(y_sic), _batch(h_N)
    p_hat = np.atleast_1d(np.asarray(fu_pattern_hat))
    out = np.empty(len(p_hat), dtype=np.int64)
    for p in np.unique(p_hat):
        rows = p_hat == p
        mask = config.fu_support[p] if config.nested else None
        out[rows] = ml_scan(y_sic[rows], h_N[rows], alloc.alpha_N, config.chi_N[p], mask)
    return out


def detect(y_F, y_N, h_F, h_N, config: DetectorConfig, alloc: PowerAllocation,
           genie_fu_idx=None) -> DetectionResult:
    """Run both receivers. With ``genie_fu_idx`` the NU cancels the true FU subblock."""
    fu_idx = fu_detect(y_F, h_F, config, alloc)
    if genie_fu_idx is None:
        sic_idx = e_sic_detect(y_N, h_N, config, alloc)
    else:
        sic_idx = np.atleast_1d(np.asarray(genie_fu_idx))
    y_sic = sic_subtract(y_N, config.chi_F[sic_idx], h_N, alloc)
    nu_idx = e_detect_nu(y_sic, h_N, config.fu_pattern[sic_idx], config, alloc)
    return DetectionResult(fu_idx, sic_idx, nu_idx)


def count_bit_errors(truth, detected, pattern_wrong):
    """Hamming distances split into (case (i), case (ii)) error bits.

    Case (i): the detected activation pattern differs from the true one, and
    every wrong bit (index or symbol) of that subblock is charged to it.
    Case (ii): pattern correct, only symbol bits wrong.
    Inputs are bit arrays of shape (T, m) or (m,) and a boolean per subblock.
    """
    truth, detected = _batch(truth), _batch(detected)
    if truth.shape != detected.shape:
        raise DomainError(f"bit arrays differ in shape: {truth.shape} vs {detected.shape}")
    wrong = np.atleast_1d(np.asarray(pattern_wrong, dtype=bool))
    per_block = np.count_nonzero(truth != detected, axis=1)
    return int(per_block[wrong].sum()), int(per_block[~wrong].sum())
