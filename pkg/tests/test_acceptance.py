"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL  detail`` line and the
session summary repeats them. The Monte Carlo criteria are marked slow
but run by default.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from nomaie.cli import main
from nomaie.codec import EnvelopeCodec, SubblockGeometry, all_bit_vectors
from nomaie.detection import DetectorConfig, detect
from nomaie.metrics import SchemeSpec, energy_efficiency, spectral_efficiency
from nomaie.phy import PowerAllocation, draw_channel, draw_noise
from nomaie.sim import ScenarioConfig, run_benchmark, run_point, run_sweep, snr_at_ber
from nomaie.theory import (
    TheoryInputs,
    ber_fu_two,
    ber_nu_two,
    block_correct_prob_four,
    index_correct_prob_four,
    index_error_prob_four,
    pep_index_fu,
    pep_index_fu_conditional_x,
    sic_error_prob_four,
)

from oracles import brute_detect, mc_mean, tse_kernel_samples, tse_products_mc
from test_codec import TABLE_I_ROWS
from test_metrics import HAND_ROWS


def report(request, n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    request.node.user_properties.append(("acceptance", line))
    capman = request.config.pluginmanager.getplugin("capturemanager")
    with capman.global_and_fixture_disabled():
        print("\n" + line)
    assert ok, line


# 1 -------------------------------------------------------------------------


def test_criterion_1_codec_fidelity(request, capsys):
    t0 = time.perf_counter()
    assert main(["mapdump", "--L", "4", "--K_F", "3", "--K_N", "2"]) == 0
    table_ok = capsys.readouterr().out == TABLE_I_ROWS
    mismatches = 0
    for geo in [(2, 1, 1), (4, 3, 2)]:
        g = SubblockGeometry(*geo)
        codec = EnvelopeCodec.for_geometry(g)
        for fb in all_bit_vectors(g.m_F):
            for nb in all_bit_vectors(g.m_N):
                fu, nu = codec.decode(*codec.encode(fb, nb))
                mismatches += (fu.bits != fb) + (nu.bits != nb)
    dt = time.perf_counter() - t0
    report(request, 1, table_ok and mismatches == 0 and dt < 1.0,
           f"mapping table rows {'match' if table_ok else 'differ'}, {mismatches} roundtrip mismatches, {dt:.2f} s")


# 2 -------------------------------------------------------------------------


def test_criterion_2_detector_oracle(request):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    T = 10_000
    bad = 0
    for geo in [(2, 1, 1), (4, 3, 2)]:
        codec = EnvelopeCodec.for_geometry(SubblockGeometry(*geo))
        L = codec.geometry.L
        for a_F, beta in [(0.9, None), (0.75, 1.0)]:
            alloc = PowerAllocation(a_F)
            beta = (alloc.alpha_F - alloc.alpha_N) / alloc.alpha_F if beta is None else beta
            cfg = DetectorConfig.from_codec(codec, beta)
            chi_f, bits_f, pat = codec.fu_realizations
            chi_n, bits_n, _ = codec.nu_realizations
            f = rng.integers(0, len(chi_f), T)
            v = rng.integers(0, chi_n.shape[1], T)
            x = alloc.alpha_F * chi_f[f] + alloc.alpha_N * chi_n[pat[f], v]
            h_F, h_N = draw_channel(L, 0.25, rng, T), draw_channel(L, 1.0, rng, T)
            y_F = x * h_F + draw_noise(L, 0.02, rng, T)
            y_N = x * h_N + draw_noise(L, 0.02, rng, T)
            res = detect(y_F, y_N, h_F, h_N, cfg, alloc)
            fu, sic, nu = brute_detect(codec, y_F, y_N, h_F, h_N, alloc.alpha_F, alloc.alpha_N, beta)
            bad += sum(tuple(b) != o for b, o in zip(bits_f[res.fu_idx], fu))
            bad += sum(tuple(b) != o for b, o in zip(bits_f[res.sic_idx], sic))
            bad += sum(tuple(b) != o for b, o in zip(bits_n[res.nu_idx], nu))
    dt = time.perf_counter() - t0
    report(request, 2, bad == 0 and dt < 10.0,
           f"{bad} disagreements over 4 x 10^4 instances, {dt:.1f} s")


# 3 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_3_error_floor_dichotomy(request):
    base = ScenarioConfig(a_F=0.75, min_bits=10**6, min_errors=400, seed=3)
    unity = run_point(replace(base, beta_e="unity"), 50.0).fu
    feas = run_point(replace(base, beta_e="feasible"), 50.0).fu
    ok = unity.ber > 1e-2 and feas.ber < 1e-3 and min(unity.bits, feas.bits) >= 10**6
    report(request, 3, ok, f"FU BER beta=1 {unity.ber:.3g}, beta* {feas.ber:.3g} "
                           f"({min(unity.bits, feas.bits):.3g} bits)")


# 4 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_4_theory_simulation(request):
    snrs = [35.0, 40.0, 45.0, 50.0]
    sc = ScenarioConfig(a_F=0.9, min_errors=400, seed=4)
    curve = run_sweep(sc, snrs)
    parts, ok = [], True
    for i, s in enumerate(snrs):
        inp = TheoryInputs.from_snr(0.9, s)
        fu_t, nu_t = ber_fu_two(inp), ber_nu_two(inp)
        fu_s, nu_s = curve.ber("FU")[i], curve.ber("NU")[i]
        d = abs(np.log10(fu_t) - np.log10(fu_s))
        r = nu_t / nu_s
        ok &= d <= 0.3 and 1 / 3 <= r <= 3
        parts.append(f"{s:g}dB FU dlog {d:.3f} NU ratio {r:.2f}")
    report(request, 4, ok, "; ".join(parts))


# 5 -------------------------------------------------------------------------

QUAD_POINTS = [(0.9, 25.0, None), (0.75, 20.0, None), (0.75, 25.0, 1.0), (0.7, 20.0, 0.5), (0.85, 20.0, 0.7)]


@pytest.mark.slow
def test_criterion_5_quadrature_oracle(request):
    t0 = time.perf_counter()
    n = 10**6
    worst, count = 0.0, 0
    g = SubblockGeometry(4, 3, 2)
    for j, (a_F, snr, beta) in enumerate(QUAD_POINTS):
        inp = TheoryInputs.from_snr(a_F, snr, beta, geometry=g)
        rng = np.random.default_rng(500 + j)
        lm, ls, lp = inp.levels
        checks = []
        # two-subcarrier index PEP and its conditional form
        u, x = rng.exponential(size=(2, n))
        for lam in (lm, lp):
            checks.append((pep_index_fu(lam, inp),
                           mc_mean(tse_kernel_samples(lam, a_F, inp.beta_e, inp.omega_F, inp.n0, u, x))))
            checks.append((pep_index_fu_conditional_x(lam, 0.4, inp),
                           mc_mean(tse_kernel_samples(lam, a_F, inp.beta_e, inp.omega_F, inp.n0, u, 0.4))))
        # TSE products under the FU gain and under the NU gain (SIC side)
        c = (lm, ls, lp)
        s_fu = tse_products_mc(c, a_F, inp.beta_e, inp.omega_F, inp.n0, n, rng)
        s_sic = tse_products_mc(c, a_F, inp.beta_e, inp.omega_N, inp.n0, n, rng)
        checks.append((block_correct_prob_four(c, inp), mc_mean(s_fu["block"])))
        for k in range(3):
            checks.append((index_error_prob_four(k, c, inp), mc_mean(s_fu[k])))
        checks.append((index_correct_prob_four(c, inp), mc_mean(s_fu["index"])))
        checks.append((sic_error_prob_four(c, inp), mc_mean(1 - s_sic["block"])))
        checks.append((sic_error_prob_four(c, inp, "printed"), mc_mean(s_sic["printed"])))
        for val, (m, se) in checks:
            z = abs(val - m) / se
            worst = max(worst, z)
            count += 1
    dt = time.perf_counter() - t0
    report(request, 5, worst < 3 and dt < 60,
           f"{count} integrals at {len(QUAD_POINTS)} points, worst |z| {worst:.2f}, {dt:.1f} s")


# 6 -------------------------------------------------------------------------

BETAS = np.round(np.arange(0.1, 1.2001, 0.05), 2)


def _tied_set(ber, se):
    """Indices statistically tied with the minimum (95 % intervals overlap)."""
    i = int(np.argmin(ber))
    return np.flatnonzero(ber - 1.96 * se <= ber[i] + 1.96 * se[i])


def _unimodal(ber, se, tied):
    lo, hi = tied.min(), tied.max()
    tol = 1.96 * np.sqrt(se[1:] ** 2 + se[:-1] ** 2)
    step = np.diff(ber)
    # falls (within noise) left of the tied set, rises right of it
    return bool(np.all(step[:lo] <= tol[:lo]) and np.all(step[hi:] >= -tol[hi:]))


@pytest.mark.slow
def test_criterion_6_beta_sweep(request):
    parts, ok = [], True
    for a_F in (0.7, 0.8, 0.9):
        b_star = PowerAllocation(a_F)
        b_star = (b_star.alpha_F - b_star.alpha_N) / b_star.alpha_F
        res = {"FU": [], "NU": []}
        for b in BETAS:
            # same seed for every beta: common random numbers across the sweep
            sc = ScenarioConfig(a_F=a_F, beta_e=float(b), min_errors=10**9, max_bits=4 * 10**6,
                                block=250_000, seed=6)
            p = run_point(sc, 40.0)
            for user in res:
                c = p.counts(user)
                res[user].append((c.ber, np.sqrt(max(c.errors, 1)) / c.bits))
        for user, rows in res.items():
            ber, se = np.array(rows).T
            tied = _tied_set(ber, se)
            b_hat = 0.5 * (BETAS[tied.min()] + BETAS[tied.max()])
            uni = _unimodal(ber, se, tied)
            near = abs(b_hat - b_star) <= 0.1 + 1e-9
            at1 = ber[np.flatnonzero(BETAS == 1.0)[0]] / ber.min()
            good = uni and near and (a_F > 0.8 or at1 >= 10)
            ok &= good
            parts.append(f"aF={a_F} {user} min@{b_hat:.2f} (beta* {b_star:.2f}, raw argmin "
                         f"{BETAS[np.argmin(ber)]:.2f}) unimodal={uni} BER(1)/min={at1:.1f}")
    report(request, 6, ok, "; ".join(parts))


# 7 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_7_benchmark_gains(request):
    snrs = list(np.arange(10.0, 52.1, 3.0))
    parts, ok = [], True
    ask = None
    for a_F in (0.75, 0.9):
        shared = ScenarioConfig(L=4, K_F=3, K_N=2, delta_m_N=1, a_F=a_F, policy="reallocation",
                                min_errors=200, seed=7)
        ie = run_benchmark("noma-ie", shared, snrs)
        on = run_benchmark("ofdm-noma", shared, snrs)
        if ask is None:
            ask = run_benchmark("ofdm", shared, snrs)
        for user in ("FU", "NU"):
            gain = snr_at_ber(on, user, 1e-4) - snr_at_ber(ie, user, 1e-4)
            ok &= abs(gain - 4.0) <= 1.5
            parts.append(f"aF={a_F} {user} gain over OFDM-NOMA {gain:.2f} dB")
        if a_F == 0.9:
            g = snr_at_ber(ask, "NU", 1e-4) - snr_at_ber(ie, "NU", 1e-4)
            ok &= abs(g - 8.0) <= 2.0
            parts.append(f"aF=0.9 NU gain over OFDM/4ASK {g:.2f} dB")
    report(request, 7, ok, "; ".join(parts))


# 8 -------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_8_im_noma_floor(request):
    parts, ok = [], True
    for b in (0.4, 0.7, 1.0):
        sc = ScenarioConfig(scheme="im-noma", L=4, K_F=2, K_N=2, a_F=0.75, beta_e=b,
                            min_errors=400, seed=8)
        p = run_point(sc, 50.0)
        ok &= p.fu.ber > 1e-2 and p.nu.ber > 1e-2
        parts.append(f"IM-NOMA beta={b} FU {p.fu.ber:.3g} NU {p.nu.ber:.3g}")
    sc = ScenarioConfig(L=4, K_F=3, K_N=2, delta_m_N=1, a_F=0.75, min_errors=400, seed=8)
    p = run_point(sc, 50.0)
    ok &= p.fu.ber < 1e-2 and p.nu.ber < 1e-2
    parts.append(f"NOMA-IE beta* FU {p.fu.ber:.3g} NU {p.nu.ber:.3g}")
    report(request, 8, ok, "; ".join(parts))


# 9 -------------------------------------------------------------------------


def test_criterion_9_metric_formulas(request):
    hand = all(spectral_efficiency(s) == se and energy_efficiency(s, "max-power") == ee
               for s, se, ee in HAND_ROWS)
    equal = {spectral_efficiency(s) for s in [
        SchemeSpec("noma-ie", L=4, K_F=3, K_N=2),
        SchemeSpec("im-noma", L=4, K_F=2, K_N=2),
        SchemeSpec("ofdm-noma", L=4, K_F=4, K_N=4),
        SchemeSpec("ofdm", L=4, K_F=4, M_F=4),
    ]}
    report(request, 9, hand and len(equal) == 1,
           f"{len(HAND_ROWS)} hand rows {'exact' if hand else 'differ'}, equal SE {sorted(map(str, equal))}")


# 10 ------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_10_reduction(request):
    snrs = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0]
    base = ScenarioConfig(L=4, K_F=4, K_N=4, a_F=0.9, min_errors=400, seed=10)
    ie = run_sweep(base, snrs)
    on = run_sweep(replace(base, scheme="ofdm-noma", seed=11), snrs)
    bad = []
    for a, b in zip(ie.points, on.points):
        for user in ("FU", "NU"):
            lo1, hi1 = a.counts(user).ci95()
            lo2, hi2 = b.counts(user).ci95()
            if hi1 < lo2 or hi2 < lo1:
                bad.append(f"{user}@{a.snr_db:g}dB")
    report(request, 10, not bad,
           f"{2 * len(snrs)} point pairs, non-overlapping: {', '.join(bad) if bad else 'none'}")
