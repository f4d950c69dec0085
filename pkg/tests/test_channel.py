import numpy as np
import pytest

from itilink import cfo as cfo_mod
from itilink.channel import (NoiseModel, PowerDelayProfile, TowerLink,
                             add_awgn, apply_downlink, cir_to_cfr,
                             estimate_noise_variance, realize_cir)
from itilink.ofdm import modulate_symbol, symbol_spectrum


def links_for(cirs, eps, cfg):
    spacing = cfg.subcarrier_spacing_hz
    return [TowerLink(tower_id=m, cir=cirs[m],
                      extra_delay_s=0.0 if m == 0 else 1e-9, cfo_hz=eps[m] * spacing,
                      eps=eps[m], power_db=0.0 if m == 0 else -3.0)
            for m in range(len(cirs))]


def test_pdp_presets_and_validation():
    pdp = PowerDelayProfile.preset("peda")
    assert pdp.delays_s == (0.0, 110e-9, 190e-9, 410e-9)
    with pytest.raises(ValueError):
        PowerDelayProfile("bad", (1e-9, 0.0), (0.0, 0.0))
    with pytest.raises(ValueError):
        PowerDelayProfile("bad", (0.0,), (0.0, 1.0))


def test_single_path_unit_power(rng):
    pdp = PowerDelayProfile("one", (0.0,), (0.0,))
    taps = np.array([realize_cir(pdp, 0.0, 0.0, 30.72e6, rng)[0]
                     for _ in range(10_000)])
    assert np.mean(np.abs(taps) ** 2) == pytest.approx(1.0, rel=0.03)


def test_pedestrian_a_tap_indices(rng):
    cir = realize_cir(PowerDelayProfile.preset("peda"), 0.0, 0.0, 30.72e6, rng)
    nonzero = np.nonzero(cir)[0]
    assert list(nonzero) == [0, 3, 6, 13]


def test_power_scaling_minus_3db(rng):
    pdp = PowerDelayProfile.preset("uniform4")
    total = 0.0
    for _ in range(10_000):
        cir = realize_cir(pdp, 0.0, -3.0, 30.72e6, rng)
        total += np.sum(np.abs(cir) ** 2)
    assert total / 10_000 == pytest.approx(10 ** (-0.3), rel=0.03)


def test_delay_exceeding_cp_rejected(rng):
    pdp = PowerDelayProfile.preset("veha")
    with pytest.raises(ValueError):
        realize_cir(pdp, 0.0, 0.0, 30.72e6, rng, n_cp=20)


def test_passthrough_single_tower(desk_cfg, rng):
    stream = rng.standard_normal(400) + 1j * rng.standard_normal(400)
    link = TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                     cfo_hz=0.0, eps=0.0, power_db=0.0)
    out = apply_downlink([stream], [link], desk_cfg)
    assert np.allclose(out, stream, atol=1e-15)


def test_single_tone_matches_frequency_domain_closed_form(desk_cfg, rng):
    # Oracle: the analytic on-bin distortion at offset eps for symbol i,
    # amplitude sin(pi e)/(N sin(pi e/N)) and phase
    # exp(j pi e (N-1)/N) exp(j 2 pi (i(N+Ncp)+Ncp) e / N).
    n = desk_cfg.n_fft
    eps = 0.073
    i_sym = 2
    grid = np.zeros(desk_cfg.n_used, dtype=complex)
    grid[31] = 1.0
    sym = modulate_symbol(grid, desk_cfg)
    stream = np.concatenate([modulate_symbol(np.zeros_like(grid), desk_cfg)] * i_sym
                            + [sym])
    link = TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                     cfo_hz=eps * desk_cfg.subcarrier_spacing_hz, eps=eps,
                     power_db=0.0)
    rx = apply_downlink([stream], [link], desk_cfg, symbol_index_i=0)
    spec = symbol_spectrum(rx[i_sym * desk_cfg.symbol_len:
                              (i_sym + 1) * desk_cfg.symbol_len], desk_cfg)
    k = desk_cfg.used_subcarriers[31]
    amp = np.sin(np.pi * eps) / (n * np.sin(np.pi * eps / n))
    phase = np.exp(1j * np.pi * eps * (n - 1) / n) * np.exp(
        2j * np.pi * (i_sym * desk_cfg.symbol_len + desk_cfg.n_cp) * eps / n)
    assert abs(spec[k] - amp * phase) < 1e-9


def test_superposition_over_towers(desk_cfg, rng):
    pdp = PowerDelayProfile.preset("uniform4")
    streams = [rng.standard_normal(500) + 1j * rng.standard_normal(500)
               for _ in range(2)]
    cirs = [realize_cir(pdp, 0.0, 0.0, desk_cfg.sample_rate_hz, rng)
            for _ in range(2)]
    links = links_for(cirs, [0.0, 0.0], desk_cfg)
    joint = apply_downlink(streams, links, desk_cfg)
    single = sum(apply_downlink([s], [l], desk_cfg)
                 for s, l in zip(streams, links))
    assert np.allclose(joint, single, atol=1e-13)


def test_model_consistency_full_ici(desk_cfg, rng):
    # Keystone: demodulated time-domain simulation equals the analytic
    # frequency-domain form (on-bin term plus full ICI sum), all N bins.
    for trial in range(4):
        m = int(rng.integers(1, 5))
        eps = rng.uniform(0.0, 0.1, m)
        pdp = PowerDelayProfile.preset("uniform4")
        cirs = [realize_cir(pdp, 0.0, 0.0, desk_cfg.sample_rate_hz, rng,
                            n_cp=desk_cfg.n_cp) for _ in range(m)]
        grids = [np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
                 for _ in range(m)]
        streams = [modulate_symbol(g, desk_cfg) for g in grids]
        links = links_for(cirs, eps, desk_cfg)
        rx = apply_downlink([s for s in streams], links, desk_cfg)
        spec = symbol_spectrum(rx, desk_cfg)
        full_x = []
        full_h = []
        for t in range(m):
            xf = np.zeros(desk_cfg.n_fft, dtype=complex)
            xf[desk_cfg.used_array] = grids[t]
            full_x.append(xf)
            full_h.append(cir_to_cfr(cirs[t], desk_cfg.n_fft))
        ana = cfo_mod.analytic_symbol_spectrum(full_x, full_h, eps, 0, desk_cfg)
        rel = np.max(np.abs(spec - ana)) / np.max(np.abs(ana))
        assert rel < 1e-8


def test_energy_preserved_without_cfo(desk_cfg, rng):
    pdp = PowerDelayProfile("one", (0.0,), (0.0,))
    p_in = p_out = 0.0
    for _ in range(300):
        cir = realize_cir(pdp, 0.0, 0.0, desk_cfg.sample_rate_hz, rng)
        stream = rng.standard_normal(300) + 1j * rng.standard_normal(300)
        link = TowerLink(tower_id=0, cir=cir, extra_delay_s=0.0, cfo_hz=0.0,
                         eps=0.0, power_db=0.0)
        p_in += np.sum(np.abs(stream) ** 2)
        p_out += np.sum(np.abs(apply_downlink([stream], [link], desk_cfg)) ** 2)
    assert p_out / p_in == pytest.approx(1.0, rel=0.02)


def test_awgn_moments(rng):
    noise = NoiseModel(sigma2=1.0)
    w = add_awgn(np.zeros(1_000_000, dtype=complex), noise, rng)
    assert np.mean(np.abs(w) ** 2) == pytest.approx(1.0, rel=0.02)
    corr = np.corrcoef(w.real, w.imag)[0, 1]
    assert abs(corr) < 0.01
    with pytest.raises(ValueError):
        NoiseModel(sigma2=0.0)


def test_noise_variance_estimator_clean_signal(desk_cfg, rng):
    x = rng.standard_normal(desk_cfg.n_used) + 1j * rng.standard_normal(desk_cfg.n_used)
    spec = symbol_spectrum(modulate_symbol(x, desk_cfg), desk_cfg)
    est = estimate_noise_variance(spec, desk_cfg.guard_bins)
    assert est < 1e-20
    with pytest.raises(ValueError):
        estimate_noise_variance(spec, [])


def test_noise_variance_estimator_pure_awgn(desk_cfg, rng):
    sigma2 = 0.1
    total = 0.0
    for _ in range(200):
        w = add_awgn(np.zeros(desk_cfg.symbol_len, dtype=complex),
                     NoiseModel(sigma2), rng)
        total += estimate_noise_variance(symbol_spectrum(w, desk_cfg),
                                         desk_cfg.guard_bins)
    assert total / 200 == pytest.approx(sigma2, rel=0.05)


def test_noise_variance_estimator_signal_plus_noise(desk_cfg, rng):
    # CFO leakage into the guards biases the estimate up; within 10%.
    sigma2 = 0.05
    eps = 0.03
    total = 0.0
    n_runs = 200
    for _ in range(n_runs):
        x = np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
        stream = modulate_symbol(x, desk_cfg)
        link = TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                         cfo_hz=eps * desk_cfg.subcarrier_spacing_hz, eps=eps,
                         power_db=0.0)
        rx = apply_downlink([stream], [link], desk_cfg)
        rx = add_awgn(rx, NoiseModel(sigma2), rng)
        total += estimate_noise_variance(symbol_spectrum(rx, desk_cfg),
                                         desk_cfg.guard_bins)
    assert total / n_runs == pytest.approx(sigma2, rel=0.10)


def test_stream_length_mismatch_rejected(desk_cfg):
    link = TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                     cfo_hz=0.0, eps=0.0, power_db=0.0)
    with pytest.raises(ValueError):
        apply_downlink([np.zeros(10), np.zeros(11)], [link, link], desk_cfg)


def test_tower_zero_reference_enforced():
    with pytest.raises(ValueError):
        TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=1e-9,
                  cfo_hz=0.0, eps=0.0, power_db=0.0)
