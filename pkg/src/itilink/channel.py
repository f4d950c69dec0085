"""Multi-tower downlink synthesis: Rayleigh multipath, CFO rotation, AWGN.

Each tower's bulk delay and power offset are folded into its channel impulse
response, so transmit streams are always unit-reference and the received
stream is

    y[t] = sum_m exp(j 2 pi t eps_m / N) * (x_m * h_m)[t] + w[t]

with ``t`` a running sample index that is phase-continuous across cyclic
prefixes and symbol boundaries.  For the body of symbol i this reproduces the
exponent ``i (N + N_cp) + N_cp + n`` of the measurement model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import OfdmConfig

# Multipath profile presets. Delays in seconds, relative powers in dB.
# "uniform4" places equal-power taps at the Pedestrian-A delay positions (the
# interferer profile used to avoid power-distribution bias); "peda"/"veha" are
# the standard ITU profiles, recorded here as scenario input.
PDP_PRESETS = {
    "uniform4": ([0.0, 110e-9, 190e-9, 410e-9], [0.0, 0.0, 0.0, 0.0]),
    "peda": ([0.0, 110e-9, 190e-9, 410e-9], [0.0, -9.7, -19.2, -22.8]),
    "veha": ([0.0, 310e-9, 710e-9, 1090e-9, 1730e-9, 2510e-9],
             [0.0, -1.0, -9.0, -10.0, -15.0, -20.0]),
}


@dataclass(frozen=True)
class PowerDelayProfile:
    name: str
    delays_s: tuple[float, ...]
    powers_db: tuple[float, ...]

    def __post_init__(self):
        if len(self.delays_s) != len(self.powers_db):
            raise ValueError("one power per delay required")
        if any(d < 0 for d in self.delays_s):
            raise ValueError("delays must be nonnegative")
        if list(self.delays_s) != sorted(self.delays_s):
            raise ValueError("delays must be ascending")

    @classmethod
    def preset(cls, name: str, delay_scale: float = 1.0) -> "PowerDelayProfile":
        delays, powers = PDP_PRESETS[name]
        return cls(name=name,
                   delays_s=tuple(d * delay_scale for d in delays),
                   powers_db=tuple(powers))


@dataclass(frozen=True)
class TowerLink:
    """One tower-to-UE path. Tower 0 is the serving (desired) tower."""

    tower_id: int
    cir: np.ndarray
    extra_delay_s: float
    cfo_hz: float
    eps: float
    power_db: float

    def __post_init__(self):
        if self.tower_id == 0 and (self.extra_delay_s != 0.0 or self.power_db != 0.0):
            raise ValueError("tower 0 is the delay and power reference")


@dataclass(frozen=True)
class NoiseModel:
    """Complex AWGN with per-sample (time-domain) variance sigma2.

    With the unscaled forward FFT, a per-sample variance of sigma2 appears as
    N * sigma2 per frequency bin.
    """

    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")


def realize_cir(pdp: PowerDelayProfile, extra_delay_s: float, power_db: float,
                sample_rate: float, rng: np.random.Generator,
                n_cp: int | None = None) -> np.ndarray:
    """Draw one Rayleigh CIR on the receiver sample grid.

    Each path becomes a circularly-symmetric complex Gaussian tap at sample
    index round((delay + extra_delay) * sample_rate); coinciding paths add in
    power. Total expected power is 10^(power_db/10).
    """
    idx = np.round((np.asarray(pdp.delays_s) + extra_delay_s) * sample_rate).astype(int)
    if n_cp is not None and idx.max() >= n_cp:
        raise ValueError(
            f"composite delay spans {idx.max() + 1} samples, exceeding CP of {n_cp}")
    weights = 10.0 ** (np.asarray(pdp.powers_db) / 10.0)
    weights = weights / weights.sum() * 10.0 ** (power_db / 10.0)
    cir = np.zeros(idx.max() + 1, dtype=complex)
    scale = np.sqrt(weights / 2.0)
    taps = scale * (rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx)))
    np.add.at(cir, idx, taps)
    return cir


def cir_to_cfr(cir: np.ndarray, n_fft: int, bins: np.ndarray | None = None) -> np.ndarray:
    """Channel frequency response H[k] = sum_l h[l] exp(-j 2 pi k l / N)."""
    full = np.fft.fft(cir, n=n_fft)
    return full if bins is None else full[np.asarray(bins)]


def cfo_rotation(eps: float, n_fft: int, start_sample_index: int,
                 n_samples: int) -> np.ndarray:
    """exp(j 2 pi t eps / N) for the running indices t = start .. start+n-1."""
    t = start_sample_index + np.arange(n_samples)
    return np.exp(2j * np.pi * t * eps / n_fft)


def apply_downlink(tx_streams: list[np.ndarray], links: list[TowerLink],
                   cfg: OfdmConfig, symbol_index_i: int = 0) -> np.ndarray:
    """Convolve, CFO-rotate and sum the tower streams (noise added separately).

    ``symbol_index_i`` is the frame position of the first symbol in the
    streams; the CFO phase runs from that symbol's first CP sample.
    """
    lengths = {len(s) for s in tx_streams}
    if len(lengths) != 1:
        raise ValueError("all tower streams must have the same length")
    if len(tx_streams) != len(links):
        raise ValueError("one link per stream required")
    n = lengths.pop()
    start = symbol_index_i * cfg.symbol_len
    out = np.zeros(n, dtype=complex)
    for stream, link in zip(tx_streams, links):
        faded = np.convolve(stream, link.cir)[:n]
        if link.eps != 0.0:
            faded = faded * cfo_rotation(link.eps, cfg.n_fft, start, n)
        out += faded
    return out


def add_awgn(samples: np.ndarray, noise: NoiseModel,
             rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. circularly-symmetric complex Gaussian noise."""
    scale = np.sqrt(noise.sigma2 / 2.0)
    w = scale * (rng.standard_normal(len(samples))
                 + 1j * rng.standard_normal(len(samples)))
    return samples + w


def estimate_noise_variance(spectrum: np.ndarray, guard_bins) -> float:
    """Per-sample noise variance from the guard-bin power of one symbol.

    ``spectrum`` holds all N bins (see :func:`itilink.ofdm.symbol_spectrum`);
    the mean guard power is divided by N to undo the unscaled-forward-FFT
    gain.  CFO leakage into the guards biases the estimate upward, which is
    deliberate: the leaked ICI is part of the effective noise downstream.
    """
    guard = np.asarray(list(guard_bins), dtype=np.int64)
    if guard.size == 0:
        raise ValueError("guard bin set is empty")
    return float(np.mean(np.abs(spectrum[guard]) ** 2) / len(spectrum))
