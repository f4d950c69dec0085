"""Gray-coded QAM constellations and the offset-corrected joint LLR detector.

The detector enumerates the full super-constellation (the Cartesian product
of all towers' alphabets, each point weighted by its phase ramp and estimated
channel gain) and forms Max-Log bit LLRs for the desired tower:

    LLR(bit) = min over hypotheses with bit=1 of d^2/sigma^2
             - min over hypotheses with bit=0 of d^2/sigma^2

so a positive LLR marks bit 0 as the more likely value.  The soft decoder
consumes the same orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit


def _gray_code(n_bits: int) -> list[int]:
    return [g ^ (g >> 1) for g in range(1 << n_bits)]


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy square QAM with per-axis Gray labels."""

    order: int
    points: np.ndarray = field(repr=False)
    labels: tuple[str, ...]
    label_bits: np.ndarray = field(repr=False)   # (order, bits) 0/1 matrix

    @property
    def bits_per_symbol(self) -> int:
        return self.order.bit_length() - 1

    def bits_of(self, index: int) -> np.ndarray:
        return self.label_bits[index]


def make_constellation(order: int) -> Constellation:
    """4-QAM or 16-QAM. The first half of a label selects I, the second Q.

    Within each axis the Gray sequence runs from the most positive level, so
    the all-zeros label sits at the top-right point ((1+j)/sqrt(2) for 4-QAM).
    """
    if order not in (4, 16):
        raise ValueError("only 4-QAM and 16-QAM are supported")
    bits_axis = (order.bit_length() - 1) // 2
    n_levels = 1 << bits_axis
    # Amplitude levels, most positive first; Gray index g sits at level g.
    levels = np.array([n_levels - 1 - 2 * i for i in range(n_levels)], float)
    gray = _gray_code(bits_axis)
    level_of_bits = {g: i for i, g in enumerate(gray)}
    points = []
    labels = []
    for bi in range(n_levels):
        for bq in range(n_levels):
            re = levels[level_of_bits[bi]]
            im = levels[level_of_bits[bq]]
            points.append(re + 1j * im)
            labels.append(format(bi, f"0{bits_axis}b") + format(bq, f"0{bits_axis}b"))
    pts = np.array(points)
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    bits = np.array([[int(b) for b in lab] for lab in labels], dtype=np.int8)
    return Constellation(order=order, points=pts, labels=tuple(labels),
                         label_bits=bits)


def map_bits(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Gray-map a bit vector to constellation symbols."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    b = c.bits_per_symbol
    if bits.size % b:
        raise ValueError(f"bit count must be a multiple of {b}")
    weights = 1 << np.arange(b - 1, -1, -1)
    label_to_index = np.empty(c.order, dtype=np.int64)
    label_vals = c.label_bits @ weights
    label_to_index[label_vals] = np.arange(c.order)
    idx = label_to_index[bits.reshape(-1, b) @ weights]
    return c.points[idx]


def demap_hard(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Nearest-point hard demapping back to bits."""
    symbols = np.asarray(symbols).ravel()
    d = np.abs(symbols[:, None] - c.points[None, :]) ** 2
    idx = np.argmin(d, axis=1)
    return c.label_bits[idx].ravel()


@dataclass(frozen=True)
class DetectionContext:
    """Everything the per-bin joint detector needs besides the observation."""

    cfr_row: np.ndarray            # (M,) estimated modified CFR at this bin
    phase_ramps: np.ndarray        # (M,) unit-magnitude C_m for this symbol
    sigma2: float                  # effective per-bin noise variance
    constellations: tuple[Constellation, ...]   # desired first

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if not np.allclose(np.abs(self.phase_ramps), 1.0, atol=1e-9):
            raise ValueError("phase ramps must be unit magnitude")


def super_constellation_table(constellations) -> np.ndarray:
    """(M, n_hyp) symbol table over the joint hypothesis space.

    Tower 0 is the slowest axis: hypothesis j transmits symbol index
    j // prod(orders of towers 1..M-1) from the desired alphabet.
    """
    grids = np.meshgrid(*[c.points for c in constellations], indexing="ij")
    return np.vstack([g.ravel() for g in grids])


def ocjllr_bin(y_d: complex, ctx: DetectionContext) -> np.ndarray:
    """Max-Log joint LLRs for the desired tower's bits on one subcarrier."""
    table = super_constellation_table(ctx.constellations)
    gains = ctx.phase_ramps * ctx.cfr_row
    candidates = gains @ table
    d2 = np.abs(y_d - candidates) ** 2 / ctx.sigma2
    c0 = ctx.constellations[0]
    n_int = table.shape[1] // c0.order
    per_symbol = d2.reshape(c0.order, n_int).min(axis=1)
    bits = c0.label_bits
    llrs = np.empty(c0.bits_per_symbol)
    for lam in range(c0.bits_per_symbol):
        ones = bits[:, lam] == 1
        llrs[lam] = per_symbol[ones].min() - per_symbol[~ones].min()
    return llrs


def conventional_llr_bin(y: complex, h: complex, sigma2: float,
                         c: Constellation) -> np.ndarray:
    """Single-tower Max-Log soft demapper (no interferer modeling)."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    d2 = np.abs(y - h * c.points) ** 2 / sigma2
    bits = c.label_bits
    llrs = np.empty(c.bits_per_symbol)
    for lam in range(c.bits_per_symbol):
        ones = bits[:, lam] == 1
        llrs[lam] = d2[ones].min() - d2[~ones].min()
    return llrs


@njit(cache=True)
def _detect_kernel(y_row, gains, points0, table_int, labels0, sigma2):
    """Full super-constellation Max-Log sweep over one symbol's bins.

    ``gains[m, k]`` is C_m * H~[k, m]; ``table_int`` holds the interferer
    hypothesis tuples ((M-1, n_int) points); ``labels0`` the desired
    constellation's 0/1 label matrix.
    """
    n_bins = y_row.shape[0]
    n0 = points0.shape[0]
    n_int = table_int.shape[1]
    n_bits = labels0.shape[1]
    out = np.empty((n_bins, n_bits))
    interference = np.empty(n_int, np.complex128)
    per_symbol = np.empty(n0)
    for k in range(n_bins):
        for j in range(n_int):
            acc = 0.0 + 0.0j
            for m in range(table_int.shape[0]):
                acc += gains[m + 1, k] * table_int[m, j]
            interference[j] = acc
        for s0 in range(n0):
            u = y_row[k] - gains[0, k] * points0[s0]
            best = np.inf
            for j in range(n_int):
                d = u - interference[j]
                d2 = d.real * d.real + d.imag * d.imag
                if d2 < best:
                    best = d2
            per_symbol[s0] = best
        for lam in range(n_bits):
            m0 = np.inf
            m1 = np.inf
            for s0 in range(n0):
                if labels0[s0, lam]:
                    if per_symbol[s0] < m1:
                        m1 = per_symbol[s0]
                else:
                    if per_symbol[s0] < m0:
                        m0 = per_symbol[s0]
            out[k, lam] = (m1 - m0) / sigma2
    return out


_INT_TABLE_CACHE: dict[tuple[int, ...], np.ndarray] = {}


def interferer_table(constellations) -> np.ndarray:
    """(M-1, n_int) hypothesis tuples for towers 1..M-1 (slowest axis first)."""
    key = tuple(c.order for c in constellations)
    cached = _INT_TABLE_CACHE.get(key)
    if cached is None:
        if len(constellations) == 1:
            cached = np.zeros((0, 1), dtype=complex)
        else:
            grids = np.meshgrid(*[c.points for c in constellations[1:]],
                                indexing="ij")
            cached = np.ascontiguousarray(np.vstack([g.ravel() for g in grids]))
        _INT_TABLE_CACHE[key] = cached
    return cached


def detect_symbol_llrs(y_row: np.ndarray, cfr_rows: np.ndarray,
                       phase_ramps: np.ndarray, sigma2: float,
                       constellations) -> np.ndarray:
    """OC-JLLR over all bins of one OFDM symbol.

    Returns an (n_bins, bits_per_symbol) LLR array for the desired tower;
    the enumeration is exhaustive over the full super-constellation, run in a
    compiled kernel so 16-QAM x 4 towers stays tractable.
    """
    c0 = constellations[0]
    gains = phase_ramps[:, None] * np.ascontiguousarray(cfr_rows)
    return _detect_kernel(
        np.ascontiguousarray(y_row, dtype=np.complex128),
        np.ascontiguousarray(gains, dtype=np.complex128),
        np.ascontiguousarray(c0.points, dtype=np.complex128),
        np.ascontiguousarray(interferer_table(constellations),
                             dtype=np.complex128),
        np.ascontiguousarray(c0.label_bits.astype(np.uint8)),
        float(sigma2))
