import numpy as np
import pytest

from itilink.ofdm import (OfdmConfig, ResourceGrid, demodulate_symbol,
                          frame_symbol_indices, guard_band_bins,
                          modulate_symbol, modulate_symbols, symbol_spectrum,
                          symmetric_used_subcarriers)


def make_cfg(n_fft, n_used, n_cp):
    return OfdmConfig(n_fft=n_fft, n_cp=n_cp,
                      used_subcarriers=symmetric_used_subcarriers(n_fft, n_used),
                      sample_rate_hz=15e3 * n_fft)


def test_config_invariants():
    cfg = make_cfg(256, 150, 18)
    assert cfg.subcarrier_spacing_hz == pytest.approx(15e3)
    assert cfg.symbol_len == 274
    with pytest.raises(ValueError):
        OfdmConfig(n_fft=8, n_cp=1, used_subcarriers=(0, 1),
                   sample_rate_hz=1.0)  # DC in used set
    with pytest.raises(ValueError):
        OfdmConfig(n_fft=8, n_cp=1, used_subcarriers=(1, 2),
                   sample_rate_hz=1.0, frame_period_p=1)


def test_all_zero_grid_modulates_to_silence(desk_cfg):
    s = modulate_symbol(np.zeros(desk_cfg.n_used, dtype=complex), desk_cfg)
    assert len(s) == desk_cfg.symbol_len
    assert np.all(s == 0)


def test_single_pilot_is_tone_and_cp_copies_tail(desk_cfg):
    grid = np.zeros(desk_cfg.n_used, dtype=complex)
    grid[7] = 1.0
    s = modulate_symbol(grid, desk_cfg)
    assert np.allclose(s[:desk_cfg.n_cp], s[-desk_cfg.n_cp:], atol=1e-15)
    k = desk_cfg.used_subcarriers[7]
    n = np.arange(desk_cfg.n_fft)
    tone = np.exp(2j * np.pi * k * n / desk_cfg.n_fft) / desk_cfg.n_fft
    assert np.allclose(s[desk_cfg.n_cp:], tone, atol=1e-15)


@pytest.mark.parametrize("n_fft,n_used,n_cp", [(64, 40, 4), (256, 150, 18),
                                               (2048, 1200, 144)])
def test_roundtrip_exact(n_fft, n_used, n_cp, rng):
    cfg = make_cfg(n_fft, n_used, n_cp)
    x = rng.standard_normal(n_used) + 1j * rng.standard_normal(n_used)
    assert np.max(np.abs(demodulate_symbol(modulate_symbol(x, cfg), cfg) - x)) \
        < 1e-12


def test_batch_modulate_matches_single(desk_cfg, rng):
    grids = rng.standard_normal((3, desk_cfg.n_used)) \
        + 1j * rng.standard_normal((3, desk_cfg.n_used))
    batch = modulate_symbols(grids, desk_cfg)
    for j in range(3):
        assert np.array_equal(batch[j], modulate_symbol(grids[j], desk_cfg))


def test_delay_inside_cp_gives_phase_slope(desk_cfg, rng):
    # Oracle: a d-sample delay of the CP-protected symbol multiplies bin k
    # by exp(-j 2 pi k d / N).
    x = rng.standard_normal(desk_cfg.n_used) + 1j * rng.standard_normal(desk_cfg.n_used)
    s = modulate_symbol(x, desk_cfg)
    d = 5
    delayed = np.concatenate([np.zeros(d, dtype=complex), s])[:len(s)]
    y = demodulate_symbol(delayed, desk_cfg)
    k = desk_cfg.used_array
    expected = x * np.exp(-2j * np.pi * k * d / desk_cfg.n_fft)
    assert np.max(np.abs(y - expected)) < 1e-10


def test_awgn_bin_variance_matches_convention(desk_cfg, rng):
    # With an unscaled forward FFT, time-domain variance v appears as N*v
    # per bin.  Monte Carlo over 10^4 symbols.
    v = 0.3
    n_sym = 10_000
    total = 0.0
    count = 0
    for _ in range(10):
        w = np.sqrt(v / 2) * (
            rng.standard_normal((n_sym // 10, desk_cfg.symbol_len))
            + 1j * rng.standard_normal((n_sym // 10, desk_cfg.symbol_len)))
        spec = np.fft.fft(w[:, desk_cfg.n_cp:], axis=1)
        total += np.sum(np.abs(spec) ** 2)
        count += spec.size
    measured = total / count
    assert measured == pytest.approx(desk_cfg.n_fft * v, rel=0.05)


def test_guard_band_partition():
    cfg = make_cfg(2048, 1200, 144)
    guards = guard_band_bins(cfg)
    assert len(guards) == 2048 - 1200 - 1
    union = set(guards) | set(cfg.used_subcarriers) | {0}
    assert union == set(range(2048))
    assert not (set(guards) & set(cfg.used_subcarriers))


def test_small_guard_band_layout():
    cfg = make_cfg(8, 4, 1)
    # Symmetric rule: used = {6, 7, 1, 2}, so guards are {3, 4, 5}.
    assert cfg.used_subcarriers == (6, 7, 1, 2)
    assert guard_band_bins(cfg) == (3, 4, 5)


def test_frame_indexing_wraps_at_period():
    idx = frame_symbol_indices(21, 7)
    assert idx[:8] == [0, 1, 2, 3, 4, 5, 6, 0]
    assert idx[7] == 0 and idx[14] == 0
    assert max(idx) == 6


def test_resource_grid_validation(desk_cfg):
    with pytest.raises(ValueError):
        ResourceGrid(symbols=[np.zeros(desk_cfg.n_used)], symbol_indices=[0, 1])


def test_spectrum_length_check(desk_cfg):
    with pytest.raises(ValueError):
        symbol_spectrum(np.zeros(10), desk_cfg)
    with pytest.raises(ValueError):
        modulate_symbol(np.zeros(3), desk_cfg)
