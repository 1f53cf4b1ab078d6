"""Monte Carlo BER engine for NOMA-IE and the benchmark schemes.

A sweep point is simulated in blocks of subblocks. Block ``j`` at SNR ``s``
draws from its own Philox stream keyed by (seed, s, j), so the result of a
block never depends on which other blocks ran or in what order, and the
per-point totals are plain sums of per-block :class:`ErrorCounts`.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .codec import DomainError, EnvelopeCodec, IndexModCodec, SubblockGeometry
from .detection import DetectorConfig, count_bit_errors, detect, feasible_beta
from .metrics import ErrorCounts
from .phy import (
    PowerAllocation,
    db_to_linear,
    draw_channel,
    draw_noise,
    power_reallocation_scale,
    snr_db_to_n0,
)

__all__ = [
    "SIM_SCHEMES",
    "ScenarioConfig",
    "BerPoint",
    "BerCurve",
    "rng_for",
    "run_trial",
    "run_block",
    "run_point",
    "run_sweep",
    "run_benchmark",
    "snr_at_ber",
    "CSV_HEADER",
    "curve_csv",
    "theory_csv",
    "ASK4_LEVELS",
]

SIM_SCHEMES = ("noma-ie", "ofdm-noma", "im-noma", "ofdm")
POLICIES = ("max-power", "reallocation")
USERS = ("FU", "NU")

# Gray-labelled 4ASK with unit mean energy: 00, 01, 11, 10 from left to right
ASK4_LEVELS = np.array([-3.0, -1.0, 1.0, 3.0]) / math.sqrt(5.0)
_ASK4_BITS = np.array([[0, 0], [0, 1], [1, 1], [1, 0]], dtype=np.uint8)


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulation scenario; channel gains are given in dB.

    ``beta_e`` is a number, 'feasible' (the floor-free value) or 'unity'.
    ``delta_m_N`` FU index bits are lent to the NU. ``min_errors`` and
    ``max_bits`` form the stopping rule; ``min_bits`` forces a minimum run.
    """

    scheme: str = "noma-ie"
    L: int = 2
    K_F: int = 1
    K_N: int = 1
    a_F: float = 0.9
    beta_e: float | str = "feasible"
    omega_F_dB: float = -6.0
    omega_N_dB: float = 0.0
    P_max: float = 1.0
    policy: str = "max-power"
    delta_m_N: int = 0
    perfect_sic: bool = False
    seed: int = 0
    min_errors: int = 400
    max_bits: int = 10**8
    min_bits: int = 0
    block: int = 20000
    snr_dB: tuple = ()

    def __post_init__(self):
        if self.scheme not in SIM_SCHEMES:
            raise DomainError(f"scheme: unknown scheme {self.scheme!r}")
        if self.policy not in POLICIES:
            raise DomainError(f"policy: must be one of {POLICIES}")
        if isinstance(self.beta_e, str):
            if self.beta_e not in ("feasible", "unity"):
                raise DomainError(f"beta_e: expected a number, 'feasible' or 'unity', got {self.beta_e!r}")
        elif not self.beta_e > 0:
            raise DomainError(f"beta_e: must be positive, got {self.beta_e}")
        if self.scheme != "ofdm":
            if not 1.0 > self.a_F > 0.5:
                raise DomainError(f"a_F: a_F must exceed a_N = 1 - a_F, got a_F={self.a_F}")
        if self.scheme == "ofdm-noma" and not self.L == self.K_F == self.K_N:
            raise DomainError("K_F: ofdm-noma needs L = K_F = K_N")
        if self.scheme == "noma-ie":
            g = self.geometry
            if not 0 <= self.delta_m_N <= g.fu_index_bits:
                raise DomainError(f"delta_m_N: at most {g.fu_index_bits} FU index bits can be lent")
        elif self.delta_m_N:
            raise DomainError("delta_m_N: bit lending only exists in noma-ie")
        if self.scheme == "im-noma":
            IndexModCodec(self.L, self.K_F), IndexModCodec(self.L, self.K_N)
        if self.min_errors < 1 or self.max_bits < 1 or self.block < 1 or self.min_bits < 0:
            raise DomainError("min_errors: stopping rule values must be positive")
        if self.P_max <= 0:
            raise DomainError("P_max: must be positive")
        object.__setattr__(self, "snr_dB", tuple(float(s) for s in self.snr_dB))

    @property
    def geometry(self) -> SubblockGeometry:
        try:
            return SubblockGeometry(self.L, self.K_F, self.K_N)
        except DomainError as e:
            raise DomainError(f"K_F: {e}") from None

    @property
    def alloc(self) -> PowerAllocation:
        return PowerAllocation(self.a_F, P_max=self.P_max)

    @property
    def omega_F(self) -> float:
        return float(db_to_linear(self.omega_F_dB))

    @property
    def omega_N(self) -> float:
        return float(db_to_linear(self.omega_N_dB))

    @property
    def beta(self) -> float:
        if self.beta_e == "feasible":
            return feasible_beta(self.alloc)
        if self.beta_e == "unity":
            return 1.0
        return float(self.beta_e)

    def tx_alloc(self) -> PowerAllocation:
        """Allocation after the power policy is applied."""
        alloc = self.alloc
        if self.policy == "max-power":
            return alloc
        if self.scheme == "im-noma":
            used = self.a_F * self.K_F + (1 - self.a_F) * self.K_N
            return alloc.scaled(math.sqrt(self.L / used))
        return alloc.scaled(power_reallocation_scale(alloc, self.geometry))

    def bits_per_subblock(self) -> tuple[int, int]:
        """Bits each user is charged for, after lending."""
        if self.scheme == "noma-ie":
            g = self.geometry
            return g.m_F - self.delta_m_N, g.m_N + self.delta_m_N
        if self.scheme == "ofdm-noma":
            return self.L, self.L
        if self.scheme == "im-noma":
            return IndexModCodec(self.L, self.K_F).m, IndexModCodec(self.L, self.K_N).m
        return self.L, self.L  # paired 4ASK users, L/2 subcarriers each

    def to_items(self) -> list[tuple[str, str]]:
        out = []
        for k, v in asdict(self).items():
            if k == "snr_dB":
                v = ",".join(_fmt(s) for s in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = _fmt(v)
            out.append((k, str(v)))
        return out


def _fmt(x) -> str:
    return repr(float(x))


def rng_for(seed: int, snr_db: float, index: int) -> np.random.Generator:
    """Counter-keyed stream for one (seed, SNR point, block) triple."""
    tag = int(round(float(snr_db) * 1000)) & 0xFFFFFFFF
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag, index])))


# ---------------------------------------------------------------- engines


class _NomaIe:
    def __init__(self, sc: ScenarioConfig):
        self.sc = sc
        self.codec = EnvelopeCodec.for_geometry(sc.geometry)
        self.alloc = sc.tx_alloc()
        self.config = DetectorConfig.from_codec(self.codec, sc.beta)
        g = sc.geometry
        self.fu_bits = self.codec.fu_realizations[1]
        self.nu_bits = self.codec.nu_realizations[1]
        self.nu_shift = g.nu_symbol_bits
        # absolute NU pattern id of (FU pattern, NU rank), to tell if I_N changed
        ids: dict = {}
        self.nu_abs = np.array(
            [[ids.setdefault(s, len(ids)) for s in sets] for sets in self.codec.nu_patterns]
        )
        n_idx = g.fu_index_bits
        self.lent = slice(n_idx - sc.delta_m_N, n_idx)

    def run(self, rng, T: int, n0: float):
        sc, g = self.sc, self.sc.geometry
        fu_num = rng.integers(0, 1 << g.m_F, size=T)
        nu_num = rng.integers(0, 1 << g.m_N, size=T)
        p = self.config.fu_pattern[fu_num]
        x_F = self.config.chi_F[fu_num]
        x_N = self.config.chi_N[p, nu_num]
        x = self.alloc.alpha_F * x_F + self.alloc.alpha_N * x_N
        h_F = draw_channel(g.L, sc.omega_F, rng, T)
        h_N = draw_channel(g.L, sc.omega_N, rng, T)
        y_F = x * h_F + draw_noise(g.L, n0, rng, T)
        y_N = x * h_N + draw_noise(g.L, n0, rng, T)
        res = detect(y_F, y_N, h_F, h_N, self.config, self.alloc,
                     genie_fu_idx=fu_num if sc.perfect_sic else None)
        p_fu = self.config.fu_pattern[res.fu_idx]
        p_sic = self.config.fu_pattern[res.sic_idx]

        true_fb, fu_fb = self.fu_bits[fu_num], self.fu_bits[res.fu_idx]
        c1, c2 = count_bit_errors(true_fb, fu_fb, p_fu != p)
        lent_fu = int(np.count_nonzero(true_fb[:, self.lent] != fu_fb[:, self.lent]))
        lent_nu = int(np.count_nonzero(true_fb[:, self.lent] != self.fu_bits[res.sic_idx][:, self.lent]))
        m_F, m_N = sc.bits_per_subblock()
        fu = ErrorCounts(T * m_F, c1, c2, -lent_fu)

        nu_wrong = self.nu_abs[p_sic, res.nu_idx >> self.nu_shift] != self.nu_abs[p, nu_num >> self.nu_shift]
        n1, n2 = count_bit_errors(self.nu_bits[nu_num], self.nu_bits[res.nu_idx], nu_wrong)
        nu = ErrorCounts(T * m_N, n1, n2, lent_nu)
        return fu, nu


class _ImNoma:
    def __init__(self, sc: ScenarioConfig):
        self.sc = sc
        self.fu_codec = IndexModCodec(sc.L, sc.K_F)
        self.nu_codec = IndexModCodec(sc.L, sc.K_N)
        self.alloc = sc.tx_alloc()
        self.config = DetectorConfig.from_index_codecs(self.fu_codec, self.nu_codec, sc.beta)

    def run(self, rng, T: int, n0: float):
        sc, L = self.sc, self.sc.L
        chi_F, bits_F, pat_F = self.fu_codec.realizations
        chi_N, bits_N, pat_N = self.nu_codec.realizations
        fu_num = rng.integers(0, len(chi_F), size=T)
        nu_num = rng.integers(0, len(chi_N), size=T)
        x = self.alloc.alpha_F * chi_F[fu_num] + self.alloc.alpha_N * chi_N[nu_num]
        h_F = draw_channel(L, sc.omega_F, rng, T)
        h_N = draw_channel(L, sc.omega_N, rng, T)
        y_F = x * h_F + draw_noise(L, n0, rng, T)
        y_N = x * h_N + draw_noise(L, n0, rng, T)
        res = detect(y_F, y_N, h_F, h_N, self.config, self.alloc,
                     genie_fu_idx=fu_num if sc.perfect_sic else None)
        c1, c2 = count_bit_errors(bits_F[fu_num], bits_F[res.fu_idx], pat_F[res.fu_idx] != pat_F[fu_num])
        n1, n2 = count_bit_errors(bits_N[nu_num], bits_N[res.nu_idx], pat_N[res.nu_idx] != pat_N[nu_num])
        m_F, m_N = sc.bits_per_subblock()
        return ErrorCounts(T * m_F, c1, c2), ErrorCounts(T * m_N, n1, n2)


class _OfdmNoma:
    """Per-subcarrier superposition with symbol-by-symbol SIC."""

    def __init__(self, sc: ScenarioConfig):
        self.sc = sc
        self.alloc = sc.tx_alloc()

    def run(self, rng, T: int, n0: float):
        sc, L, a = self.sc, self.sc.L, self.alloc
        b_F = rng.integers(0, 2, size=(T, L), dtype=np.uint8)
        b_N = rng.integers(0, 2, size=(T, L), dtype=np.uint8)
        s_F, s_N = 1.0 - 2.0 * b_F, 1.0 - 2.0 * b_N
        x = a.alpha_F * s_F + a.alpha_N * s_N
        h_F = draw_channel(L, sc.omega_F, rng, T)
        h_N = draw_channel(L, sc.omega_N, rng, T)
        y_F = x * h_F + draw_noise(L, n0, rng, T)
        y_N = x * h_N + draw_noise(L, n0, rng, T)
        # BPSK decisions only need the sign of the matched-filter output
        d_F = (np.real(np.conj(h_F) * y_F) < 0).astype(np.uint8)
        if sc.perfect_sic:
            s_sic = s_F
        else:
            s_sic = np.where(np.real(np.conj(h_N) * y_N) < 0, -1.0, 1.0)
        y_sic = y_N - a.alpha_F * s_sic * h_N
        d_N = (np.real(np.conj(h_N) * y_sic) < 0).astype(np.uint8)
        no_idx = np.zeros(T, dtype=bool)
        fu = ErrorCounts(T * L, *count_bit_errors(b_F, d_F, no_idx))
        nu = ErrorCounts(T * L, *count_bit_errors(b_N, d_N, no_idx))
        return fu, nu


class _Ofdm4Ask:
    """Orthogonal pairing: each user gets half the subcarriers with Gray 4ASK."""

    def __init__(self, sc: ScenarioConfig):
        if sc.L % 2:
            raise DomainError("L: paired OFDM needs an even subblock size")
        self.sc = sc
        self.amp = math.sqrt(sc.P_max)

    def _user(self, rng, T: int, n0: float, omega: float):
        n = self.sc.L // 2
        sym = rng.integers(0, 4, size=(T, n))
        x = self.amp * ASK4_LEVELS[sym]
        h = draw_channel(n, omega, rng, T)
        y = x * h + draw_noise(n, n0, rng, T)
        z = np.real(np.conj(h) * y) / (np.abs(h) ** 2 * self.amp)
        dec = np.argmin(np.abs(z[..., None] - ASK4_LEVELS), axis=-1)
        truth = _ASK4_BITS[sym].reshape(T, 2 * n)
        got = _ASK4_BITS[dec].reshape(T, 2 * n)
        return ErrorCounts(T * 2 * n, *count_bit_errors(truth, got, np.zeros(T, dtype=bool)))

    def run(self, rng, T: int, n0: float):
        return (self._user(rng, T, n0, self.sc.omega_F),
                self._user(rng, T, n0, self.sc.omega_N))


_ENGINES = {"noma-ie": _NomaIe, "im-noma": _ImNoma, "ofdm-noma": _OfdmNoma, "ofdm": _Ofdm4Ask}
_engine_cache: dict = {}


def _engine(sc: ScenarioConfig):
    key = replace(sc, snr_dB=(), seed=0)
    eng = _engine_cache.get(key)
    if eng is None:
        if len(_engine_cache) > 64:
            _engine_cache.clear()
        eng = _engine_cache[key] = _ENGINES[sc.scheme](sc)
    return eng


def run_block(sc: ScenarioConfig, snr_db: float, index: int, size: int):
    """``size`` subblocks from stream ``index`` at ``snr_db``; returns (FU, NU) counts."""
    if size < 1:
        raise DomainError("block size must be positive")
    rng = rng_for(sc.seed, snr_db, index)
    return _engine(sc).run(rng, size, snr_db_to_n0(snr_db, sc.P_max))


def run_trial(sc: ScenarioConfig, trial_index: int, snr_db: float):
    """A single subblock per user, deterministic in (seed, trial_index, snr_db)."""
    return run_block(sc, snr_db, trial_index, 1)


# ---------------------------------------------------------------- sweeps


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    fu: ErrorCounts
    nu: ErrorCounts
    subblocks: int
    seconds: float = field(compare=False, default=0.0)

    def counts(self, user: str) -> ErrorCounts:
        return {"FU": self.fu, "NU": self.nu}[user]


@dataclass
class BerCurve:
    scheme: str
    beta_e: float
    a_F: float
    points: list = field(default_factory=list)

    def snr(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])

    def ber(self, user: str) -> np.ndarray:
        return np.array([p.counts(user).ber for p in self.points])


def _stop(fu: ErrorCounts, nu: ErrorCounts, sc: ScenarioConfig) -> bool:
    bits = max(fu.bits, nu.bits)
    if bits < sc.min_bits:
        return False
    if bits >= sc.max_bits:
        return True
    return min(fu.errors, nu.errors) >= sc.min_errors


def run_point(sc: ScenarioConfig, snr_db: float) -> BerPoint:
    """Accumulate blocks at one SNR until the stopping rule fires.

    Block sizes double from ``sc.block`` so that easy points finish fast and
    hard ones are not dominated by per-block overhead; the schedule depends
    only on the counts, so it is reproducible.
    """
    t0 = time.perf_counter()
    fu = nu = ErrorCounts()
    n, index, size = 0, 0, sc.block
    while True:
        f, u = run_block(sc, snr_db, index, size)
        fu, nu = fu + f, nu + u
        n += size
        index += 1
        if _stop(fu, nu, sc):
            break
        size = min(size * 2, 1 << 18)
    return BerPoint(float(snr_db), fu, nu, n, time.perf_counter() - t0)


def run_sweep(sc: ScenarioConfig, snr_list_dB=None) -> BerCurve:
    snrs = tuple(sc.snr_dB if snr_list_dB is None else snr_list_dB)
    if not snrs:
        raise DomainError("snr_dB: empty SNR list")
    curve = BerCurve(sc.scheme, sc.beta if sc.scheme != "ofdm" else 0.0, sc.a_F)
    for s in snrs:
        curve.points.append(run_point(sc, s))
    return curve


def run_benchmark(scheme: str, shared: ScenarioConfig, snr_list_dB=None) -> BerCurve:
    """Benchmark ``scheme`` under the channel, power and stopping settings of ``shared``.

    Geometry follows the usual comparison set-up: OFDM-NOMA per subcarrier
    with L = 4, IM-NOMA with L = 4 and K = 2 per user, OFDM pairs with 4ASK.
    """
    geo = {
        "noma-ie": dict(L=shared.L, K_F=shared.K_F, K_N=shared.K_N, delta_m_N=shared.delta_m_N),
        "ofdm-noma": dict(L=4, K_F=4, K_N=4, delta_m_N=0),
        "im-noma": dict(L=4, K_F=2, K_N=2, delta_m_N=0),
        "ofdm": dict(L=4, K_F=4, K_N=4, delta_m_N=0),
    }
    if scheme not in geo:
        raise DomainError(f"no simulator for scheme {scheme!r}")
    return run_sweep(replace(shared, scheme=scheme, **geo[scheme]), snr_list_dB)


def snr_at_ber(curve: BerCurve, user: str, target: float) -> float:
    """SNR where the BER first drops through ``target``, by log-linear interpolation."""
    s, b = curve.snr(), curve.ber(user)
    for i in range(1, len(s)):
        if b[i - 1] >= target > b[i]:
            lo, hi = math.log10(max(b[i - 1], 1e-300)), math.log10(max(b[i], 1e-300))
            t = (lo - math.log10(target)) / (lo - hi)
            return float(s[i - 1] + t * (s[i] - s[i - 1]))
    raise DomainError(f"{user} BER never crosses {target:g} on this curve")


# ---------------------------------------------------------------- CSV

CSV_HEADER = ["snr_db", "user", "scheme", "beta_e", "a_f", "bits", "errors_case1",
              "errors_case2", "errors_borrowed", "ber", "source"]


def curve_csv(curve: BerCurve, users=USERS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for user in users:
        for p in curve.points:
            c = p.counts(user)
            w.writerow([_fmt(p.snr_db), user, curve.scheme, _fmt(curve.beta_e), _fmt(curve.a_F),
                        c.bits, c.errors_case1, c.errors_case2, c.errors_borrowed,
                        _fmt(c.ber), "sim"])
    return buf.getvalue()


def theory_csv(rows, scheme: str, beta_e: float, a_F: float) -> str:
    """``rows`` are (snr_db, user, ber) triples."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for snr, user, ber in rows:
        w.writerow([_fmt(snr), user, scheme, _fmt(beta_e), _fmt(a_F), 0, 0, 0, 0, _fmt(ber), "theory"])
    return buf.getvalue()
