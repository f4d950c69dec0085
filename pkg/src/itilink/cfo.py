"""Carrier-frequency-offset compensation: derotation, phase ramps, analytic ICI.

Derotation multiplies the received stream by exp(-j 2 pi eps* t / N) with the
same running sample index the channel rotation uses, so a tower with offset
eps_m behaves exactly like one with the residual offset eps_m - eps*.  The
per-symbol phase ramp C_m therefore carries the residual offset:

    C_m(i) = exp(j 2 pi i (N + N_cp) (eps_m - eps*) / N),  C_m(0) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ofdm import OfdmConfig

DEROTATION_MODES = ("none", "mean", "max")


def mean_offset(eps) -> float:
    """Arithmetic mean of the normalized offsets: the total-ICI minimizer."""
    eps = list(eps)
    if not eps:
        raise ValueError("empty offset list")
    return float(sum(eps) / len(eps))


def derotation_offset(eps, mode: str, eps_max: float) -> float:
    """The eps* a given derotation mode removes from the stream."""
    if mode == "none":
        return 0.0
    if mode == "mean":
        return mean_offset(eps)
    if mode == "max":
        return float(eps_max)
    raise ValueError(f"unknown derotation mode {mode!r}")


@dataclass(frozen=True)
class CfoSet:
    """Mean-centered view of the per-tower normalized offsets."""

    eps: tuple[float, ...]
    eps_bar: float
    eps_residual: tuple[float, ...]

    @classmethod
    def from_offsets(cls, eps) -> "CfoSet":
        eps = tuple(float(e) for e in eps)
        bar = mean_offset(eps)
        return cls(eps=eps, eps_bar=bar,
                   eps_residual=tuple(e - bar for e in eps))


def derotate_stream(samples: np.ndarray, eps_bar: float,
                    start_sample_index: int, cfg: OfdmConfig) -> np.ndarray:
    """Multiply sample t by exp(-j 2 pi eps_bar (start + t) / N)."""
    if eps_bar == 0.0:
        return np.array(samples, copy=True)
    t = start_sample_index + np.arange(len(samples))
    return samples * np.exp(-2j * np.pi * eps_bar * t / cfg.n_fft)


def phase_ramp(eps_residual_m: float, symbol_index_i: int,
               cfg: OfdmConfig) -> complex:
    """Inter-symbol phase progression C_m for frame position i."""
    if not 0 <= symbol_index_i < cfg.frame_period_p:
        raise ValueError("symbol index outside the frame")
    ang = 2.0 * np.pi * symbol_index_i * cfg.symbol_len * eps_residual_m / cfg.n_fft
    return complex(np.cos(ang), np.sin(ang))


@dataclass(frozen=True)
class PhaseRamp:
    """The M unit-magnitude C_m values for one symbol position."""

    values: tuple[complex, ...]

    @classmethod
    def for_symbol(cls, eps_residuals, symbol_index_i: int,
                   cfg: OfdmConfig) -> "PhaseRamp":
        return cls(values=tuple(phase_ramp(e, symbol_index_i, cfg)
                                for e in eps_residuals))


def _leak_coeff(offset_bins: np.ndarray, n_fft: int) -> np.ndarray:
    """sin(pi d) / (N sin(pi d / N)) with the removable singularity at d = 0.

    Exact zeros at nonzero integer offsets (and exact one at multiples of N)
    so the ICI vanishes identically when the offset is zero.
    """
    d = np.asarray(offset_bins, dtype=float)
    out = np.empty_like(d)
    integral = d == np.round(d)
    mult_n = integral & (np.mod(d, n_fft) == 0)
    out[mult_n] = 1.0
    out[integral & ~mult_n] = 0.0
    frac = ~integral
    out[frac] = np.sin(np.pi * d[frac]) / (n_fft * np.sin(np.pi * d[frac] / n_fft))
    return out


def subcarrier_gain(eps: float, n_fft: int) -> complex:
    """Per-bin amplitude/phase distortion of the on-bin term at offset eps.

    This is the k-independent factor sin(pi eps)/(N sin(pi eps / N)) times
    exp(j pi eps (N-1)/N); the CP phase exp(j 2 pi N_cp eps / N) is applied
    separately where needed.
    """
    coeff = float(_leak_coeff(np.array([eps]), n_fft)[0])
    return coeff * np.exp(1j * np.pi * eps * (n_fft - 1) / n_fft)


def modified_cfr_factor(eps_residual: float, cfg: OfdmConfig) -> complex:
    """Scale turning the true CFR into the estimable modified CFR.

    H~[k] = factor * H[k]; covers the CP phase, the half-symbol phase and the
    amplitude attenuation, all independent of k.
    """
    cp_phase = np.exp(2j * np.pi * cfg.n_cp * eps_residual / cfg.n_fft)
    return complex(cp_phase * subcarrier_gain(eps_residual, cfg.n_fft))


def ici_term(l: int, k: int, eps_m: float, cfr_row: np.ndarray,
             tx_symbol: np.ndarray, cfg: OfdmConfig) -> complex:
    """Single inter-carrier leakage summand from bin l onto bin k.

    ``cfr_row`` and ``tx_symbol`` are full-N vectors for the tower in
    question, evaluated at the (possibly residual) offset ``eps_m``.
    """
    if l == k:
        raise ValueError("ICI is defined between distinct bins")
    n = cfg.n_fft
    d = l - k + eps_m
    pre = np.exp(2j * np.pi * cfg.n_cp * eps_m / n)
    coeff = float(_leak_coeff(np.array([d]), n)[0])
    return complex(pre * coeff * np.exp(1j * np.pi * d * (n - 1) / n)
                   * cfr_row[l] * tx_symbol[l])


def ici_total(k: int, eps_m: float, cfr_row: np.ndarray,
              tx_symbol: np.ndarray, cfg: OfdmConfig) -> complex:
    """Total leakage onto bin k from all other bins of one tower."""
    n = cfg.n_fft
    l = np.arange(n)
    mask = l != k
    d = l[mask] - k + eps_m
    pre = np.exp(2j * np.pi * cfg.n_cp * eps_m / n)
    coeffs = _leak_coeff(d, n) * np.exp(1j * np.pi * d * (n - 1) / n)
    return complex(pre * np.sum(coeffs * cfr_row[mask] * tx_symbol[mask]))


def analytic_symbol_spectrum(tx_symbols_full: np.ndarray, cfrs_full: np.ndarray,
                             eps_residuals, symbol_index_i: int,
                             cfg: OfdmConfig) -> np.ndarray:
    """Frequency-domain prediction for one derotated symbol, all N bins.

    Assembles, per tower, the on-bin term C_m H~[k] X[k] plus the full ICI
    sum; used as the analytic oracle for the time-domain simulator.  O(N^2)
    per tower, diagnostic use only.
    """
    n = cfg.n_fft
    out = np.zeros(n, dtype=complex)
    k = np.arange(n)
    for x_full, h_full, eps in zip(tx_symbols_full, cfrs_full, eps_residuals):
        c_m = phase_ramp(eps, symbol_index_i, cfg)
        on_bin = modified_cfr_factor(eps, cfg) * h_full * x_full
        d = k[None, :] - k[:, None] + eps  # (target k, source l)
        coeffs = _leak_coeff(d, n) * np.exp(1j * np.pi * d * (n - 1) / n)
        np.fill_diagonal(coeffs, 0.0)
        pre = np.exp(2j * np.pi * cfg.n_cp * eps / n)
        ici = pre * (coeffs @ (h_full * x_full))
        out += c_m * (on_bin + ici)
    return out
