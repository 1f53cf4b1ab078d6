"""Envelope forming and subcarrier mapping for the two-user NOMA-IE subblock.

Index sets are tuples of 1-based subcarrier numbers in increasing order, which
is how the mapping tables are usually written down. Subblocks are numpy
arrays of length ``L`` (position ``gamma - 1`` holds subcarrier ``gamma``).

Bit layout used throughout the package, per user and per subblock::

    [index bits (MSB first) | symbol bits of active subcarriers, ascending]

so that a user's realization number is simply the big-endian integer of its
bit vector and the pattern rank is that number shifted right by the symbol
bit count.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DomainError",
    "DecodeError",
    "SubblockGeometry",
    "BitGroup",
    "index_bit_capacity",
    "envelope_bit_capacity",
    "envelope_capacity_ternary",
    "rank_index_set",
    "unrank_index_set",
    "bpsk_map",
    "bpsk_demap",
    "form_envelope",
    "map_subblock",
    "demap_subblock",
    "EnvelopeCodec",
    "IndexModCodec",
    "ENVELOPE_TABLE_432",
    "IM_TABLE_4_2",
]


class DomainError(ValueError):
    """Raised for arguments outside an operation's domain."""


class DecodeError(ValueError):
    """Raised when a subblock is not a legal realization of the mapping table."""


# Mixed index bits -> (I_F, I_N) for L=4, K_F=3, K_N=2.
ENVELOPE_TABLE_432: dict[tuple[int, ...], tuple[tuple[int, ...], tuple[int, ...]]] = {
    (0, 0, 0): ((2, 3, 4), (3, 4)),
    (0, 0, 1): ((2, 3, 4), (2, 3)),
    (0, 1, 0): ((1, 3, 4), (3, 4)),
    (0, 1, 1): ((1, 3, 4), (1, 3)),
    (1, 0, 0): ((1, 2, 4), (2, 4)),
    (1, 0, 1): ((1, 2, 4), (1, 2)),
    (1, 1, 0): ((1, 2, 3), (2, 3)),
    (1, 1, 1): ((1, 2, 3), (1, 2)),
}

# Per-user index bits -> I_u for the IM-NOMA benchmark with L=4, K_u=2.
IM_TABLE_4_2: dict[tuple[int, ...], tuple[int, ...]] = {
    (0, 0): (1, 2),
    (0, 1): (2, 3),
    (1, 0): (3, 4),
    (1, 1): (1, 4),
}


def index_bit_capacity(L: int, K: int) -> int:
    """Number of bits an activation pattern of ``K`` out of ``L`` carries."""
    if L < 0 or K < 0 or K > L:
        raise DomainError(f"need 0 <= K <= L, got L={L}, K={K}")
    # floor(log2(n)) for a positive int n is its bit length minus one
    return math.comb(L, K).bit_length() - 1


@dataclass(frozen=True)
class SubblockGeometry:
    """Subblock size, active-subcarrier counts and BPSK orders of both users."""

    L: int
    K_F: int
    K_N: int
    M_F: int = 2
    M_N: int = 2

    def __post_init__(self):
        if self.L < 1:
            raise DomainError(f"L must be positive, got {self.L}")
        if not 0 <= self.K_N <= self.K_F <= self.L:
            raise DomainError(
                f"need 0 <= K_N <= K_F <= L, got L={self.L}, K_F={self.K_F}, K_N={self.K_N}"
            )
        if self.M_F != 2 or self.M_N != 2:
            raise DomainError("only BPSK (M=2) is supported")

    @property
    def fu_index_bits(self) -> int:
        return index_bit_capacity(self.L, self.K_F)

    @property
    def nu_index_bits(self) -> int:
        return index_bit_capacity(self.K_F, self.K_N)

    @property
    def index_bits(self) -> int:
        return self.fu_index_bits + self.nu_index_bits

    @property
    def fu_symbol_bits(self) -> int:
        return self.K_F * int(math.log2(self.M_F))

    @property
    def nu_symbol_bits(self) -> int:
        return self.K_N * int(math.log2(self.M_N))

    @property
    def m_F(self) -> int:
        return self.fu_index_bits + self.fu_symbol_bits

    @property
    def m_N(self) -> int:
        return self.nu_index_bits + self.nu_symbol_bits


@dataclass(frozen=True)
class BitGroup:
    """Bits one user carries in one subblock.

    ``borrowed`` is the signed count of envelope index bits taken from
    (positive) or lent to (negative) the other user.
    """

    index_bits: tuple[int, ...]
    symbol_bits: tuple[int, ...]
    borrowed: int = 0

    @property
    def bits(self) -> tuple[int, ...]:
        return self.index_bits + self.symbol_bits


def envelope_bit_capacity(geometry: SubblockGeometry) -> int:
    return geometry.index_bits


def envelope_capacity_ternary(L: int) -> float:
    """Upper bound on envelope-borne bits per subblock: every subcarrier
    carries 0, 1 or 2 users."""
    if L < 1:
        raise DomainError(f"L must be positive, got {L}")
    return L * math.log2(3)


def _check_bits(bits: Sequence[int], n: int, what: str) -> tuple[int, ...]:
    bits = tuple(int(b) for b in bits)
    if len(bits) != n:
        raise DomainError(f"{what}: expected {n} bits, got {len(bits)}")
    if any(b not in (0, 1) for b in bits):
        raise DomainError(f"{what}: bits must be 0 or 1")
    return bits


def _bits_to_int(bits: Iterable[int]) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def _int_to_bits(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def unrank_index_set(rank: int, L: int, K: int) -> tuple[int, ...]:
    """The ``rank``-th K-subset of {1..L} in lexicographic order.

    Only the first ``2**index_bit_capacity(L, K)`` subsets are addressable.
    """
    usable = 1 << index_bit_capacity(L, K)
    if not 0 <= rank < usable:
        raise DomainError(f"rank {rank} outside [0, {usable})")
    out = []
    x = 1
    for i in range(K, 0, -1):
        # skip blocks of subsets that start with x
        while rank >= math.comb(L - x, i - 1):
            rank -= math.comb(L - x, i - 1)
            x += 1
        out.append(x)
        x += 1
    return tuple(out)


def rank_index_set(index_set: Sequence[int], L: int, K: int) -> int:
    """Inverse of :func:`unrank_index_set`."""
    s = tuple(index_set)
    if len(s) != K or any(not 1 <= i <= L for i in s) or any(a >= b for a, b in zip(s, s[1:])):
        raise DomainError(f"{s} is not a strictly increasing {K}-subset of 1..{L}")
    rank = 0
    prev = 0
    for pos, x in enumerate(s):
        remaining = K - pos
        for y in range(prev + 1, x):
            rank += math.comb(L - y, remaining - 1)
        prev = x
    if rank >= 1 << index_bit_capacity(L, K):
        raise DomainError(f"{s} is beyond the usable pattern range")
    return rank


def bpsk_map(bits: Sequence[int]) -> np.ndarray:
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def bpsk_demap(symbols: np.ndarray) -> np.ndarray:
    return (np.real(symbols) < 0).astype(np.uint8)


def _nu_sets_within(fu_set: tuple[int, ...], K_N: int) -> list[tuple[int, ...]]:
    # NU ranks index K_N-subsets of positions inside I_F, lexicographically.
    n_usable = 1 << index_bit_capacity(len(fu_set), K_N)
    return [
        tuple(fu_set[p - 1] for p in unrank_index_set(r, len(fu_set), K_N))
        for r in range(n_usable)
    ]


def form_envelope(mixed_index_bits: Sequence[int], geometry: SubblockGeometry):
    """Select (I_F, I_N) from the mixed index bits; I_N is always a subset of I_F."""
    return EnvelopeCodec.for_geometry(geometry).form_envelope(mixed_index_bits)


def map_subblock(index_set: Sequence[int], symbol_bits: Sequence[int], L: int) -> np.ndarray:
    """Place BPSK symbols on the active subcarriers of a length-``L`` subblock."""
    index_set = tuple(index_set)
    symbol_bits = _check_bits(symbol_bits, len(index_set), "symbol bits")
    x = np.zeros(L, dtype=complex)
    if index_set:
        if min(index_set) < 1 or max(index_set) > L:
            raise DomainError(f"index set {index_set} outside 1..{L}")
        x[np.asarray(index_set) - 1] = bpsk_map(symbol_bits)
    return x


def demap_subblock(x_F: np.ndarray, x_N: np.ndarray, geometry: SubblockGeometry):
    """Recover both users' bit groups from a pair of legal subblocks."""
    return EnvelopeCodec.for_geometry(geometry).decode(x_F, x_N)


def _support(x: np.ndarray, tol: float = 1e-9) -> tuple[int, ...]:
    return tuple(int(i) + 1 for i in np.flatnonzero(np.abs(np.asarray(x)) > tol))


class EnvelopeCodec:
    """Mapping tables for one NOMA-IE geometry.

    The (4, 3, 2) geometry uses the published example table verbatim; any
    other geometry uses lexicographic unranking for the FU pattern and for
    the NU pattern inside the FU set.
    """

    _cache: dict[SubblockGeometry, "EnvelopeCodec"] = {}

    def __init__(self, geometry: SubblockGeometry):
        self.geometry = g = geometry
        if (g.L, g.K_F, g.K_N) == (4, 3, 2):
            self.fu_patterns = [ENVELOPE_TABLE_432[_int_to_bits(p, 2) + (0,)][0] for p in range(4)]
            self.nu_patterns = [
                [ENVELOPE_TABLE_432[_int_to_bits(p, 2) + (r,)][1] for r in (0, 1)] for p in range(4)
            ]
        else:
            n_fu = 1 << g.fu_index_bits
            self.fu_patterns = [unrank_index_set(r, g.L, g.K_F) for r in range(n_fu)]
            self.nu_patterns = [_nu_sets_within(s, g.K_N) for s in self.fu_patterns]
        self._lookup = {
            (fs, ns): (p, r)
            for p, fs in enumerate(self.fu_patterns)
            for r, ns in enumerate(self.nu_patterns[p])
        }

    @classmethod
    def for_geometry(cls, geometry: SubblockGeometry) -> "EnvelopeCodec":
        codec = cls._cache.get(geometry)
        if codec is None:
            codec = cls._cache[geometry] = cls(geometry)
        return codec

    def form_envelope(self, mixed_index_bits: Sequence[int]):
        g = self.geometry
        bits = _check_bits(mixed_index_bits, g.index_bits, "mixed index bits")
        p = _bits_to_int(bits[: g.fu_index_bits])
        r = _bits_to_int(bits[g.fu_index_bits:])
        return self.fu_patterns[p], self.nu_patterns[p][r]

    def encode(self, fu: BitGroup | Sequence[int], nu: BitGroup | Sequence[int]):
        """Map per-user bit vectors (index bits first) to the two subblocks."""
        g = self.geometry
        fu_bits = _check_bits(fu.bits if isinstance(fu, BitGroup) else fu, g.m_F, "FU bits")
        nu_bits = _check_bits(nu.bits if isinstance(nu, BitGroup) else nu, g.m_N, "NU bits")
        i_f, i_n = self.form_envelope(fu_bits[: g.fu_index_bits] + nu_bits[: g.nu_index_bits])
        x_f = map_subblock(i_f, fu_bits[g.fu_index_bits:], g.L)
        x_n = map_subblock(i_n, nu_bits[g.nu_index_bits:], g.L)
        return x_f, x_n

    def decode(self, x_F: np.ndarray, x_N: np.ndarray) -> tuple[BitGroup, BitGroup]:
        g = self.geometry
        key = (_support(x_F), _support(x_N))
        if key not in self._lookup:
            raise DecodeError(f"activation patterns {key} are not in the mapping table")
        p, r = self._lookup[key]
        fu = BitGroup(
            _int_to_bits(p, g.fu_index_bits),
            tuple(int(b) for b in bpsk_demap(np.asarray(x_F)[np.asarray(key[0], dtype=int) - 1])),
        )
        nu = BitGroup(
            _int_to_bits(r, g.nu_index_bits),
            tuple(int(b) for b in bpsk_demap(np.asarray(x_N)[np.asarray(key[1], dtype=int) - 1]))
            if key[1] else (),
        )
        return fu, nu

    def table_rows(self) -> list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]:
        g = self.geometry
        rows = []
        for p, fs in enumerate(self.fu_patterns):
            for r, ns in enumerate(self.nu_patterns[p]):
                rows.append((_int_to_bits(p, g.fu_index_bits) + _int_to_bits(r, g.nu_index_bits), fs, ns))
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mixed_index_bits", "I_F", "I_N"])
        for bits, fs, ns in self.table_rows():
            w.writerow(["".join(map(str, bits)), " ".join(map(str, fs)), " ".join(map(str, ns))])
        return buf.getvalue()

    # Realization sets used by the vectorized detectors.

    @cached_property
    def fu_realizations(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(chi [n, L] real, bits [n, m_F] uint8, pattern rank [n]) in realization order."""
        g = self.geometry
        n = 1 << g.m_F
        chi = np.zeros((n, g.L))
        bits = np.zeros((n, g.m_F), dtype=np.uint8)
        for f in range(n):
            b = _int_to_bits(f, g.m_F)
            bits[f] = b
            pat = self.fu_patterns[f >> g.fu_symbol_bits]
            if pat:
                chi[f, np.asarray(pat) - 1] = bpsk_map(b[g.fu_index_bits:])
        return chi, bits, np.arange(n) >> g.fu_symbol_bits

    @cached_property
    def nu_realizations(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(chi [n_fu_patterns, n, L], bits [n, m_N], NU rank [n]).

        ``chi[p]`` is the NU realization set conditioned on FU pattern ``p``.
        """
        g = self.geometry
        n = 1 << g.m_N
        chi = np.zeros((len(self.fu_patterns), n, g.L))
        bits = np.array([_int_to_bits(v, g.m_N) for v in range(n)], dtype=np.uint8).reshape(n, g.m_N)
        for p, sets in enumerate(self.nu_patterns):
            for v in range(n):
                pat = sets[v >> g.nu_symbol_bits]
                if pat:
                    chi[p, v, np.asarray(pat) - 1] = bpsk_map(bits[v, g.nu_index_bits:])
        return chi, bits, np.arange(n) >> g.nu_symbol_bits


@dataclass
class IndexModCodec:
    """Single-user OFDM-IM mapping (used by the IM-NOMA benchmark).

    Uses the published L=4, K=2 table when applicable, lexicographic
    unranking otherwise.
    """

    L: int
    K: int
    patterns: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        if not 0 <= self.K <= self.L:
            raise DomainError(f"need 0 <= K <= L, got L={self.L}, K={self.K}")
        if (self.L, self.K) == (4, 2):
            self.patterns = [IM_TABLE_4_2[k] for k in sorted(IM_TABLE_4_2)]
        else:
            self.patterns = [
                unrank_index_set(r, self.L, self.K)
                for r in range(1 << index_bit_capacity(self.L, self.K))
            ]

    @property
    def index_bits(self) -> int:
        return index_bit_capacity(self.L, self.K)

    @property
    def m(self) -> int:
        return self.index_bits + self.K

    def encode(self, bits: Sequence[int]) -> np.ndarray:
        bits = _check_bits(bits, self.m, "bits")
        pat = self.patterns[_bits_to_int(bits[: self.index_bits])]
        return map_subblock(pat, bits[self.index_bits:], self.L)

    def decode(self, x: np.ndarray) -> tuple[int, ...]:
        pat = _support(x)
        if pat not in self.patterns:
            raise DecodeError(f"pattern {pat} is not in the mapping table")
        idx = _int_to_bits(self.patterns.index(pat), self.index_bits)
        sym = tuple(int(b) for b in bpsk_demap(np.asarray(x)[np.asarray(pat, dtype=int) - 1])) if pat else ()
        return idx + sym

    @cached_property
    def realizations(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(chi [n, L], bits [n, m], pattern rank [n])."""
        n = 1 << self.m
        chi = np.zeros((n, self.L))
        bits = np.zeros((n, self.m), dtype=np.uint8)
        for v in range(n):
            b = _int_to_bits(v, self.m)
            bits[v] = b
            pat = self.patterns[v >> self.K]
            if pat:
                chi[v, np.asarray(pat) - 1] = bpsk_map(b[self.index_bits:])
        return chi, bits, np.arange(n) >> self.K


def all_bit_vectors(n: int) -> list[tuple[int, ...]]:
    return list(product((0, 1), repeat=n))
