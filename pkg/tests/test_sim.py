from dataclasses import replace

import numpy as np
import pytest

from nomaie.codec import DomainError
from nomaie.metrics import ErrorCounts
from nomaie.sim import (
    ASK4_LEVELS,
    BerCurve,
    BerPoint,
    ScenarioConfig,
    curve_csv,
    rng_for,
    run_benchmark,
    run_block,
    run_point,
    run_sweep,
    run_trial,
    snr_at_ber,
    theory_csv,
)

SMALL = dict(min_errors=50, max_bits=200_000, block=5000)
S432 = ScenarioConfig(L=4, K_F=3, K_N=2, delta_m_N=1, **SMALL)


def test_config_validation_names_the_key():
    with pytest.raises(DomainError, match="^a_F: a_F must exceed a_N"):
        ScenarioConfig(a_F=0.4)
    with pytest.raises(DomainError, match="^delta_m_N"):
        ScenarioConfig(delta_m_N=2)
    with pytest.raises(DomainError, match="^scheme"):
        ScenarioConfig(scheme="sc-fdma")
    with pytest.raises(DomainError, match="^K_F"):
        ScenarioConfig(scheme="ofdm-noma", L=4, K_F=3, K_N=3)
    assert ScenarioConfig(a_F=0.75).beta == pytest.approx(0.4226, abs=1e-4)
    assert ScenarioConfig(beta_e="unity").beta == 1.0


def test_rng_streams_are_independent_of_order():
    a = rng_for(1, 30.0, 5).standard_normal(4)
    rng_for(1, 30.0, 4).standard_normal(100)
    np.testing.assert_array_equal(a, rng_for(1, 30.0, 5).standard_normal(4))
    assert not np.array_equal(a, rng_for(1, 30.5, 5).standard_normal(4))
    assert not np.array_equal(a, rng_for(2, 30.0, 5).standard_normal(4))


def test_trial_determinism():
    assert run_trial(S432, 7, 10.0) == run_trial(S432, 7, 10.0)
    a = run_block(S432, 10.0, 0, 2000)
    assert a == run_block(S432, 10.0, 0, 2000)
    assert a != run_block(replace(S432, seed=1), 10.0, 0, 2000)


def test_point_determinism_and_accounting():
    p = run_point(S432, 15.0)
    assert p == run_point(S432, 15.0)
    assert p.fu.bits == 4 * p.subblocks and p.nu.bits == 4 * p.subblocks
    assert p.fu.errors_borrowed <= 0 <= p.nu.errors_borrowed


@pytest.mark.parametrize("sc", [
    ScenarioConfig(),
    S432,
    ScenarioConfig(L=4, K_F=4, K_N=4),
    ScenarioConfig(scheme="ofdm-noma", L=4, K_F=4, K_N=4),
    ScenarioConfig(scheme="ofdm", L=4, K_F=4, K_N=4),
    ScenarioConfig(L=4, K_F=3, K_N=2, policy="reallocation"),
])
def test_noiseless_limit_is_error_free(sc):
    fu, nu = run_block(sc, 150.0, 0, 20000)
    assert fu.errors == 0 and nu.errors == 0


def test_im_noma_floor_even_without_noise():
    sc = ScenarioConfig(scheme="im-noma", L=4, K_F=2, K_N=2, a_F=0.75, beta_e="unity")
    fu, _ = run_block(sc, 150.0, 0, 20000)
    assert fu.ber > 1e-2


def test_unity_beta_floor_in_noma_ie():
    fu, _ = run_block(ScenarioConfig(a_F=0.75, beta_e="unity"), 150.0, 0, 20000)
    assert fu.ber > 1e-2


def test_genie_sic_not_worse():
    sc = replace(S432, min_errors=10**9, max_bits=400_000)
    real = run_point(sc, 20.0).nu.ber
    genie = run_point(replace(sc, perfect_sic=True), 20.0).nu.ber
    assert genie <= real


def test_stopping_rule():
    sc = ScenarioConfig(min_errors=100, block=1000)
    p = run_point(sc, 10.0)
    assert min(p.fu.errors, p.nu.errors) >= 100
    # bits cap: an SNR with essentially no errors stops at max_bits
    p = run_point(replace(sc, max_bits=30_000), 120.0)
    assert 30_000 <= p.fu.bits < 30_000 + 2 * 16_000
    p = run_point(replace(sc, min_errors=1, min_bits=50_000), 0.0)
    assert p.fu.bits >= 50_000


def test_ber_falls_with_snr():
    curve = run_sweep(replace(S432, min_errors=200), [10.0, 20.0, 30.0])
    for user in ("FU", "NU"):
        b = curve.ber(user)
        assert b[0] > b[1] > b[2] > 0


def test_ask4_levels_unit_energy():
    assert np.mean(ASK4_LEVELS**2) == pytest.approx(1.0)


def test_benchmark_bits_match_equal_se():
    shared = replace(S432, policy="reallocation")
    for scheme in ("noma-ie", "ofdm-noma", "im-noma", "ofdm"):
        c = run_benchmark(scheme, shared, [20.0])
        p = c.points[0]
        assert (p.fu.bits + p.nu.bits) == 8 * p.subblocks, scheme
    with pytest.raises(DomainError):
        run_benchmark("sc-fdma", shared, [20.0])


def _curve(bers):
    pts = [BerPoint(s, ErrorCounts(10**6, int(b * 1e6)), ErrorCounts(10**6, int(b * 1e6)), 1)
           for s, b in zip((0, 10, 20), bers)]
    return BerCurve("noma-ie", 0.5, 0.9, pts)


def test_snr_at_ber_interpolates_in_log_domain():
    c = _curve([1e-1, 1e-3, 1e-5])
    assert snr_at_ber(c, "FU", 1e-2) == pytest.approx(5.0)
    assert snr_at_ber(c, "NU", 1e-4) == pytest.approx(15.0)
    with pytest.raises(DomainError):
        snr_at_ber(c, "FU", 1e-7)


def test_csv_byte_identical_and_well_formed():
    sc = replace(S432, snr_dB=(10.0, 14.0))
    a, b = curve_csv(run_sweep(sc)), curve_csv(run_sweep(sc))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == ("snr_db,user,scheme,beta_e,a_f,bits,errors_case1,errors_case2,"
                        "errors_borrowed,ber,source")
    assert len(lines) == 5 and all(l.endswith(",sim") for l in lines[1:])
    t = theory_csv([(10.0, "FU", 1e-3)], "noma-ie", 0.5, 0.9)
    assert t.splitlines()[1] == "10.0,FU,noma-ie,0.5,0.9,0,0,0,0,0.001,theory"


def test_empty_sweep_rejected():
    with pytest.raises(DomainError):
        run_sweep(ScenarioConfig())
