"""OFDM symbol assembly/disassembly and frame timing.

A frame is one estimation (pilot) symbol followed by ``frame_period_p - 1``
data symbols; the symbol index ``i`` runs 0..p-1 and resets at every
estimation symbol.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .numerics import fft, ifft


@dataclass(frozen=True)
class OfdmConfig:
    """Static OFDM numerology.

    ``used_subcarriers`` are absolute FFT bin indices in spectral order
    (negative frequencies first), symmetric around the nulled DC bin.
    """

    n_fft: int
    n_cp: int
    used_subcarriers: tuple[int, ...]
    sample_rate_hz: float
    frame_period_p: int = 7

    def __post_init__(self):
        used = self.used_subcarriers
        if len(used) > self.n_fft:
            raise ValueError("more used subcarriers than FFT bins")
        if 0 in used:
            raise ValueError("DC bin must not be in the used set")
        if len(set(used)) != len(used):
            raise ValueError("duplicate used subcarrier")
        if any(not 0 <= k < self.n_fft for k in used):
            raise ValueError("used subcarrier index out of range")
        if self.frame_period_p < 2:
            raise ValueError("frame_period_p must be >= 2")
        if self.n_cp < 0 or self.n_cp >= self.n_fft:
            raise ValueError("n_cp must be in [0, n_fft)")

    @property
    def n_used(self) -> int:
        return len(self.used_subcarriers)

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.sample_rate_hz / self.n_fft

    @property
    def symbol_len(self) -> int:
        """Samples per OFDM symbol including the cyclic prefix."""
        return self.n_fft + self.n_cp

    @cached_property
    def guard_bins(self) -> tuple[int, ...]:
        return guard_band_bins(self)

    @cached_property
    def used_array(self) -> np.ndarray:
        return np.asarray(self.used_subcarriers, dtype=np.int64)


def symmetric_used_subcarriers(n_fft: int, n_used: int) -> tuple[int, ...]:
    """Contiguous used block split symmetrically around the nulled DC bin.

    Returned in spectral order: n_used/2 negative-frequency bins
    (n_fft - n_used/2 .. n_fft - 1) followed by bins 1 .. n_used/2.
    """
    if n_used % 2 or n_used <= 0:
        raise ValueError("n_used must be positive and even")
    if n_used >= n_fft:
        raise ValueError("need room for DC and guards")
    half = n_used // 2
    return tuple(range(n_fft - half, n_fft)) + tuple(range(1, half + 1))


def guard_band_bins(cfg: OfdmConfig) -> tuple[int, ...]:
    """All bins that are neither used nor DC, ascending."""
    used = set(cfg.used_subcarriers)
    return tuple(k for k in range(cfg.n_fft) if k != 0 and k not in used)


@dataclass
class ResourceGrid:
    """Per-symbol frequency-domain payloads over the used subcarriers.

    ``symbol_indices[j]`` is the frame position i of ``symbols[j]`` (0 for the
    estimation symbol, wrapping at frame_period_p).
    """

    symbols: list[np.ndarray]
    symbol_indices: list[int]

    def __post_init__(self):
        if len(self.symbols) != len(self.symbol_indices):
            raise ValueError("one index per symbol required")


def frame_symbol_indices(n_symbols: int, p: int, start: int = 0) -> list[int]:
    """Frame position for each of ``n_symbols`` consecutive symbols."""
    return [(start + j) % p for j in range(n_symbols)]


def modulate_symbol(grid_symbol: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Map used bins, inverse-transform, and prepend the cyclic prefix."""
    grid_symbol = np.asarray(grid_symbol)
    if grid_symbol.shape != (cfg.n_used,):
        raise ValueError(
            f"grid symbol must have length {cfg.n_used}, got {grid_symbol.shape}")
    return modulate_symbols(grid_symbol[None, :], cfg)[0]


def modulate_symbols(grid_symbols: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Batch form of :func:`modulate_symbol`: (n_sym, n_used) in,
    (n_sym, n_fft + n_cp) out."""
    n_sym = grid_symbols.shape[0]
    bins = np.zeros((n_sym, cfg.n_fft), dtype=complex)
    bins[:, cfg.used_array] = grid_symbols
    body = ifft(bins)
    return np.concatenate([body[:, cfg.n_fft - cfg.n_cp:], body], axis=1)


def symbol_spectrum(samples: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """Strip the CP and forward-transform to all N bins."""
    samples = np.asarray(samples)
    if samples.shape != (cfg.symbol_len,):
        raise ValueError(
            f"expected {cfg.symbol_len} samples, got {samples.shape}")
    return fft(samples[cfg.n_cp:])


def demodulate_symbol(samples: np.ndarray, cfg: OfdmConfig) -> np.ndarray:
    """CP removal + forward transform, returning the used bins in grid order."""
    return symbol_spectrum(samples, cfg)[cfg.used_array]
