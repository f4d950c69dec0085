import numpy as np
import pytest

from itilink import cfo as cfo_mod
from itilink.cfo import (CfoSet, derotate_stream, derotation_offset, ici_term,
                         ici_total, mean_offset, phase_ramp)
from itilink.channel import (PowerDelayProfile, TowerLink, apply_downlink,
                             cir_to_cfr, realize_cir)
from itilink.ofdm import demodulate_symbol, modulate_symbol, symbol_spectrum


def test_mean_offset_arithmetic():
    assert mean_offset([0.03, 0.05]) == pytest.approx(0.04)
    assert mean_offset([0.07]) == pytest.approx(0.07)
    with pytest.raises(ValueError):
        mean_offset([])


def test_mean_minimizes_sum_squared_error(rng):
    # Oracle: exhaustive grid search of the derotation objective.
    eps = rng.uniform(0, 0.1, 5)
    grid = np.linspace(-0.05, 0.15, 10_000)
    cost = ((eps[None, :] - grid[:, None]) ** 2).sum(axis=1)
    best = grid[np.argmin(cost)]
    assert mean_offset(eps) == pytest.approx(best, abs=2e-5)


def test_cfo_set_invariants(rng):
    eps = rng.uniform(0, 0.1, 4)
    s = CfoSet.from_offsets(eps)
    assert s.eps_bar == pytest.approx(np.mean(eps))
    assert abs(sum(s.eps_residual)) < 1e-15


def test_derotation_offset_modes():
    eps = [0.0, 0.02, 0.04]
    assert derotation_offset(eps, "none", 0.05) == 0.0
    assert derotation_offset(eps, "mean", 0.05) == pytest.approx(0.02)
    assert derotation_offset(eps, "max", 0.05) == 0.05
    with pytest.raises(ValueError):
        derotation_offset(eps, "median", 0.05)


def test_derotate_identity_and_inverse(desk_cfg, rng):
    x = rng.standard_normal(300) + 1j * rng.standard_normal(300)
    assert np.array_equal(derotate_stream(x, 0.0, 0, desk_cfg), x)
    y = derotate_stream(x, 0.031, 9, desk_cfg)
    back = derotate_stream(y, -0.031, 9, desk_cfg)
    assert np.max(np.abs(back - x)) < 1e-12


def test_derotation_cancels_single_tower_cfo(desk_cfg, rng):
    # Derotating by the tower's own offset must reproduce the zero-CFO
    # reference constellation.
    eps = 0.06
    grid = np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
    cir = realize_cir(PowerDelayProfile.preset("uniform4"), 0.0, 0.0,
                      desk_cfg.sample_rate_hz, rng, n_cp=desk_cfg.n_cp)
    stream = modulate_symbol(grid, desk_cfg)

    def run(eps_val, derot):
        link = TowerLink(tower_id=0, cir=cir, extra_delay_s=0.0,
                         cfo_hz=eps_val * desk_cfg.subcarrier_spacing_hz,
                         eps=eps_val, power_db=0.0)
        rx = apply_downlink([stream], [link], desk_cfg)
        rx = derotate_stream(rx, derot, 0, desk_cfg)
        return demodulate_symbol(rx, desk_cfg)

    assert np.max(np.abs(run(eps, eps) - run(0.0, 0.0))) < 1e-9


def test_phase_ramp_identities(desk_cfg):
    assert phase_ramp(0.05, 0, desk_cfg) == pytest.approx(1.0)
    for i in range(desk_cfg.frame_period_p):
        assert phase_ramp(0.0, i, desk_cfg) == pytest.approx(1.0)
        assert abs(phase_ramp(0.033, i, desk_cfg)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        phase_ramp(0.01, desk_cfg.frame_period_p, desk_cfg)


def test_phase_ramp_matches_measured_drift(desk_cfg, rng):
    # Oracle: measure the per-symbol phase advance of a noiseless
    # single-tower simulation and compare with the closed form.
    eps = 0.05
    i_sym = 3
    expected = np.exp(2j * np.pi * i_sym * desk_cfg.symbol_len * eps
                      / desk_cfg.n_fft)
    assert phase_ramp(eps, i_sym, desk_cfg) == pytest.approx(expected)
    grid = np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
    stream = np.concatenate([modulate_symbol(grid, desk_cfg)] * (i_sym + 1))
    link = TowerLink(tower_id=0, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                     cfo_hz=eps * desk_cfg.subcarrier_spacing_hz, eps=eps,
                     power_db=0.0)
    rx = apply_downlink([stream], [link], desk_cfg)
    sym0 = demodulate_symbol(rx[:desk_cfg.symbol_len], desk_cfg)
    symi = demodulate_symbol(rx[i_sym * desk_cfg.symbol_len:
                                (i_sym + 1) * desk_cfg.symbol_len], desk_cfg)
    drift = symi / sym0
    assert np.max(np.abs(drift - phase_ramp(eps, i_sym, desk_cfg))) < 1e-9


def test_ici_zero_offset_and_monotonic_growth(desk_cfg, rng):
    h = np.ones(desk_cfg.n_fft, dtype=complex)
    x = np.zeros(desk_cfg.n_fft, dtype=complex)
    x[desk_cfg.used_array] = np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
    assert ici_total(40, 0.0, h, x, desk_cfg) == 0.0
    assert ici_term(10, 40, 0.0, h, x, desk_cfg) == 0.0
    powers = []
    for eps in (0.01, 0.02, 0.05, 0.1):
        p = sum(abs(ici_total(k, eps, h, x, desk_cfg)) ** 2
                for k in desk_cfg.used_subcarriers[60:70])
        powers.append(p)
    assert all(b > a for a, b in zip(powers, powers[1:]))
    with pytest.raises(ValueError):
        ici_term(5, 5, 0.01, h, x, desk_cfg)


def test_ici_total_is_sum_of_terms(desk_cfg, rng):
    h = cir_to_cfr(np.array([0.7, 0.2j, -0.1]), desk_cfg.n_fft)
    x = np.zeros(desk_cfg.n_fft, dtype=complex)
    x[desk_cfg.used_array] = np.exp(2j * np.pi * rng.random(desk_cfg.n_used))
    k = 77
    eps = 0.04
    total = sum(ici_term(l, k, eps, h, x, desk_cfg)
                for l in range(desk_cfg.n_fft) if l != k)
    assert ici_total(k, eps, h, x, desk_cfg) == pytest.approx(total, abs=1e-12)


def test_residual_ici_power_after_mean_derotation(desk_cfg, rng):
    # Two towers at +/-delta after mean derotation: residual ICI power on the
    # used bins matches the analytic sum within 1%.
    delta = 0.04
    grids = [np.exp(2j * np.pi * rng.random(desk_cfg.n_used)) for _ in range(2)]
    streams = [modulate_symbol(g, desk_cfg) for g in grids]
    links = [TowerLink(tower_id=t, cir=np.array([1.0 + 0j]), extra_delay_s=0.0,
                       cfo_hz=(0.05 + s * delta) * desk_cfg.subcarrier_spacing_hz,
                       eps=0.05 + s * delta, power_db=0.0)
             for t, s in ((0, 1), (1, -1))]
    rx = apply_downlink(streams, links, desk_cfg)
    rx = derotate_stream(rx, 0.05, 0, desk_cfg)
    spec = symbol_spectrum(rx, desk_cfg)
    ana_signal = np.zeros(desk_cfg.n_fft, dtype=complex)
    ana_ici = np.zeros(desk_cfg.n_fft, dtype=complex)
    for g, s in zip(grids, (1, -1)):
        xf = np.zeros(desk_cfg.n_fft, dtype=complex)
        xf[desk_cfg.used_array] = g
        hf = np.ones(desk_cfg.n_fft, dtype=complex)
        fac = cfo_mod.modified_cfr_factor(s * delta, desk_cfg)
        ana_signal += fac * xf
        for k in desk_cfg.used_subcarriers:
            ana_ici[k] += ici_total(k, s * delta, hf, xf, desk_cfg)
    used = desk_cfg.used_array
    sim_ici = spec[used] - ana_signal[used]
    p_sim = np.sum(np.abs(sim_ici) ** 2)
    p_ana = np.sum(np.abs(ana_ici[used]) ** 2)
    assert p_sim == pytest.approx(p_ana, rel=0.01)


def test_mean_derotation_minimizes_analytic_ici(desk_cfg, rng):
    # Fig. 4 ordering at the analytic level: over random offset draws with a
    # locked desired tower, mean derotation never loses to none or max.
    eps_max = 0.05
    n = desk_cfg.n_fft

    def leak_power(eps):
        d = np.arange(1, n)
        c = np.sin(np.pi * (d + eps)) / (n * np.sin(np.pi * (d + eps) / n))
        c2 = np.sin(np.pi * (-d + eps)) / (n * np.sin(np.pi * (-d + eps) / n))
        return float(np.sum(c ** 2) + np.sum(c2 ** 2))

    powers_db = np.array([0.0, -3.0, -3.0, -3.0])
    w = 10 ** (powers_db / 10)
    for _ in range(100):
        eps = np.concatenate([[0.0], rng.uniform(0, eps_max, 3)])
        def total(eps_star):
            return sum(wi * leak_power(e - eps_star) for wi, e in zip(w, eps))
        t_mean = total(np.mean(eps))
        assert t_mean <= total(0.0) + 1e-12
        assert t_mean <= total(eps_max) + 1e-12
