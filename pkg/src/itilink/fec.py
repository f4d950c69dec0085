"""Rate-1/3 turbo codec with Max-Log-MAP decoding and rate matching.

Two identical recursive systematic convolutional constituents (feedback 13,
feedforward 15 octal, memory 3) in parallel concatenation through a seeded
pseudo-random interleaver.  Both constituents are trellis-terminated; the
codeword layout is

    [systematic K | parity1 K | parity2 K | tail1 sys 3 | tail1 par 3
                                          | tail2 sys 3 | tail2 par 3]

for 3K + 12 bits total.  All soft values use the positive-means-zero LLR
orientation (ln P(b=0)/P(b=1)), matching the detector output.  Max-Log
constituent decoding makes the decoder exactly invariant to a uniform
positive scaling of its input LLRs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .detection import Constellation, map_bits
from .ofdm import ResourceGrid

FEEDBACK_POLY = 0o13
FORWARD_POLY = 0o15
MEMORY = 3
N_STATES = 1 << MEMORY
N_TAIL_BITS = 4 * MEMORY   # sys+par tails for both constituents


def _build_trellis() -> tuple[np.ndarray, np.ndarray]:
    """next_state[u, s] and parity[u, s] for the 13/15 RSC."""
    next_state = np.zeros((2, N_STATES), dtype=np.int64)
    parity = np.zeros((2, N_STATES), dtype=np.int64)
    fb_taps = [(FEEDBACK_POLY >> (MEMORY - 1 - j)) & 1 for j in range(MEMORY)]
    ff_taps = [(FORWARD_POLY >> (MEMORY - 1 - j)) & 1 for j in range(MEMORY)]
    fb_d0 = (FEEDBACK_POLY >> MEMORY) & 1
    ff_d0 = (FORWARD_POLY >> MEMORY) & 1
    assert fb_d0 == 1 and ff_d0 == 1
    for s in range(N_STATES):
        regs = [(s >> (MEMORY - 1 - j)) & 1 for j in range(MEMORY)]
        for u in range(2):
            a = u
            for t, r in zip(fb_taps, regs):
                a ^= t & r
            p = a
            for t, r in zip(ff_taps, regs):
                p ^= t & r
            next_state[u, s] = (a << (MEMORY - 1)) | (s >> 1)
            parity[u, s] = p
    return next_state, parity


_NEXT_STATE, _PARITY = _build_trellis()


def _termination_input(state: int) -> int:
    """Input bit that drives the feedback node to zero (trellis termination)."""
    regs = [(state >> (MEMORY - 1 - j)) & 1 for j in range(MEMORY)]
    fb_taps = [(FEEDBACK_POLY >> (MEMORY - 1 - j)) & 1 for j in range(MEMORY)]
    a = 0
    for t, r in zip(fb_taps, regs):
        a ^= t & r
    return a


_TERM_INPUT = np.array([_termination_input(s) for s in range(N_STATES)],
                       dtype=np.int64)


@njit(cache=True)
def _rsc_encode_kernel(bits, next_state, parity, term_input, memory,
                       sys_out, par_out):
    state = 0
    n = bits.shape[0]
    for k in range(n):
        u = bits[k]
        sys_out[k] = u
        par_out[k] = parity[u, state]
        state = next_state[u, state]
    for j in range(memory):
        u = term_input[state]
        sys_out[n + j] = u
        par_out[n + j] = parity[u, state]
        state = next_state[u, state]
    return state


def rsc_encode(bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Encode one terminated RSC stream: (systematic+tail, parity+tail)."""
    bits = np.ascontiguousarray(bits, dtype=np.int64)
    sys_out = np.empty(len(bits) + MEMORY, dtype=np.int64)
    par_out = np.empty(len(bits) + MEMORY, dtype=np.int64)
    end_state = _rsc_encode_kernel(bits, _NEXT_STATE, _PARITY, _TERM_INPUT,
                                   MEMORY, sys_out, par_out)
    assert end_state == 0
    return sys_out.astype(np.int8), par_out.astype(np.int8)


@dataclass(frozen=True)
class TurboConfig:
    """Codec parameters; the interleaver is a seeded random permutation."""

    block_length: int
    iterations: int = 8
    interleaver_seed: int = 0x1711
    interleaver: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.block_length < MEMORY + 1:
            raise ValueError("block too short")
        perm = np.random.default_rng(self.interleaver_seed).permutation(
            self.block_length)
        object.__setattr__(self, "interleaver", perm)

    @property
    def n_coded(self) -> int:
        return 3 * self.block_length + N_TAIL_BITS


def turbo_encode(bits: np.ndarray, cfg: TurboConfig) -> np.ndarray:
    """Encode K info bits into the 3K+12 layout described above."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if len(bits) != cfg.block_length:
        raise ValueError(f"expected {cfg.block_length} info bits, got {len(bits)}")
    sys1, par1 = rsc_encode(bits)
    sys2, par2 = rsc_encode(bits[cfg.interleaver])
    k = cfg.block_length
    return np.concatenate([
        sys1[:k], par1[:k], par2[:k],
        sys1[k:], par1[k:], sys2[k:], par2[k:],
    ]).astype(np.int8)


@njit(cache=True)
def _bcjr_maxlog(ls, lp, la, next_state, parity, n_info):   # pragma: no cover
    """Max-Log BCJR posterior LLRs for one terminated constituent.

    ``ls``/``lp``/``la`` cover all n_info + MEMORY trellis steps (a-priori is
    zero on the tail); returns posteriors for the info steps only.
    """
    steps = ls.shape[0]
    n_states = next_state.shape[1]
    neg = -1.0e30
    alpha = np.full((steps + 1, n_states), neg)
    alpha[0, 0] = 0.0
    for k in range(steps):
        for s in range(n_states):
            a = alpha[k, s]
            if a == neg:
                continue
            for u in range(2):
                p = parity[u, s]
                g = 0.5 * ((1 - 2 * u) * (ls[k] + la[k]) + (1 - 2 * p) * lp[k])
                ns = next_state[u, s]
                v = a + g
                if v > alpha[k + 1, ns]:
                    alpha[k + 1, ns] = v
        mx = alpha[k + 1, 0]
        for s in range(1, n_states):
            if alpha[k + 1, s] > mx:
                mx = alpha[k + 1, s]
        for s in range(n_states):
            alpha[k + 1, s] -= mx
    beta = np.full((steps + 1, n_states), neg)
    beta[steps, 0] = 0.0
    for k in range(steps - 1, -1, -1):
        mx = neg
        for s in range(n_states):
            best = neg
            for u in range(2):
                p = parity[u, s]
                g = 0.5 * ((1 - 2 * u) * (ls[k] + la[k]) + (1 - 2 * p) * lp[k])
                v = g + beta[k + 1, next_state[u, s]]
                if v > best:
                    best = v
            beta[k, s] = best
            if best > mx:
                mx = best
        for s in range(n_states):
            beta[k, s] -= mx
    post = np.empty(n_info)
    for k in range(n_info):
        m0 = neg
        m1 = neg
        for s in range(n_states):
            for u in range(2):
                p = parity[u, s]
                g = 0.5 * ((1 - 2 * u) * (ls[k] + la[k]) + (1 - 2 * p) * lp[k])
                v = alpha[k, s] + g + beta[k + 1, next_state[u, s]]
                if u == 0:
                    if v > m0:
                        m0 = v
                else:
                    if v > m1:
                        m1 = v
        post[k] = m0 - m1
    return post


def _split_codeword_llrs(llrs: np.ndarray, cfg: TurboConfig):
    k = cfg.block_length
    m = MEMORY
    sys_info = llrs[:k]
    par1 = np.concatenate([llrs[k:2 * k], llrs[3 * k + m:3 * k + 2 * m]])
    par2 = np.concatenate([llrs[2 * k:3 * k], llrs[3 * k + 3 * m:3 * k + 4 * m]])
    tail1_sys = llrs[3 * k:3 * k + m]
    tail2_sys = llrs[3 * k + 2 * m:3 * k + 3 * m]
    return sys_info, par1, par2, tail1_sys, tail2_sys


def turbo_decode(llrs: np.ndarray, cfg: TurboConfig) -> tuple[np.ndarray, bool]:
    """Iterative Max-Log turbo decoding of a depunctured LLR vector.

    Returns the hard-decided info bits and a flag marking whether the hard
    decisions were already stable across the last two iterations.  The
    iteration count is fixed (no data-dependent early exit) so runs are
    reproducible trial for trial.
    """
    llrs = np.asarray(llrs, dtype=np.float64).ravel()
    if len(llrs) != cfg.n_coded:
        raise ValueError(f"expected {cfg.n_coded} LLRs, got {len(llrs)}")
    k = cfg.block_length
    perm = cfg.interleaver
    sys_info, par1, par2, tail1_sys, tail2_sys = _split_codeword_llrs(llrs, cfg)
    ls1 = np.concatenate([sys_info, tail1_sys])
    ls2 = np.concatenate([sys_info[perm], tail2_sys])
    la1 = np.zeros(k + MEMORY)
    la2 = np.zeros(k + MEMORY)
    prev_hard = None
    converged = False
    post2_info = np.zeros(k)
    for _ in range(cfg.iterations):
        post1 = _bcjr_maxlog(ls1, par1, la1, _NEXT_STATE, _PARITY, k)
        ext1 = post1 - sys_info - la1[:k]
        la2[:k] = ext1[perm]
        post2 = _bcjr_maxlog(ls2, par2, la2, _NEXT_STATE, _PARITY, k)
        ext2 = post2 - sys_info[perm] - la2[:k]
        la1[:k][perm] = ext2
        post2_info = post2
        hard = post2 < 0
        if prev_hard is not None and np.array_equal(hard, prev_hard):
            converged = True
        prev_hard = hard
    bits = np.zeros(k, dtype=np.int8)
    bits[perm] = (post2_info < 0).astype(np.int8)
    return bits, converged


@dataclass(frozen=True)
class RateMatcher:
    """Puncturing of the two parity streams to a target rate.

    Kept parity positions are spread evenly over each stream (systematic and
    tail bits are never punctured); counts are chosen so the realized rate,
    termination included, lands within 1% of the target.
    """

    target_rate: Fraction
    block_length: int

    @classmethod
    def for_rate(cls, rate, block_length: int) -> "RateMatcher":
        return cls(target_rate=Fraction(rate), block_length=block_length)

    @property
    def _keep_per_stream(self) -> tuple[int, int]:
        k = self.block_length
        if self.target_rate == Fraction(1, 3):
            return k, k
        n_total = round(k / self.target_rate)
        n_parity = n_total - k - N_TAIL_BITS
        if not 0 <= n_parity <= 2 * k:
            raise ValueError(f"rate {self.target_rate} unreachable for K={k}")
        return (n_parity + 1) // 2, n_parity // 2

    @staticmethod
    def _spread(n_keep: int, length: int) -> np.ndarray:
        if n_keep == 0:
            return np.empty(0, dtype=np.int64)
        return np.round(np.linspace(0, length - 1, n_keep)).astype(np.int64)

    @property
    def keep_indices(self) -> np.ndarray:
        """Sorted indices into the 3K+12 codeword layout that survive."""
        k = self.block_length
        n1, n2 = self._keep_per_stream
        idx = [np.arange(k),
               k + self._spread(n1, k),
               2 * k + self._spread(n2, k),
               np.arange(3 * k, 3 * k + N_TAIL_BITS)]
        return np.concatenate(idx)

    @property
    def n_transmitted(self) -> int:
        return len(self.keep_indices)

    @property
    def realized_rate(self) -> float:
        return self.block_length / self.n_transmitted

    def puncture(self, codeword: np.ndarray) -> np.ndarray:
        if len(codeword) != 3 * self.block_length + N_TAIL_BITS:
            raise ValueError("codeword length mismatch")
        return np.asarray(codeword)[self.keep_indices]

    def depuncture(self, llrs: np.ndarray) -> np.ndarray:
        """Zero-fill punctured positions of a transmitted-LLR vector."""
        keep = self.keep_indices
        if len(llrs) != len(keep):
            raise ValueError("transmitted LLR length mismatch")
        full = np.zeros(3 * self.block_length + N_TAIL_BITS)
        full[keep] = llrs
        return full

    def extension_indices(self, n_extra: int) -> np.ndarray:
        """Evenly spread punctured parity positions, for pilot-symbol fill.

        These are disjoint from :attr:`keep_indices`; transmitting them on
        freed estimation-symbol subcarriers lowers the effective code rate.
        """
        k = self.block_length
        kept = set(self.keep_indices.tolist())
        pool = np.array([j for j in range(k, 3 * k) if j not in kept],
                        dtype=np.int64)
        if n_extra > len(pool):
            raise ValueError(
                f"only {len(pool)} punctured parity bits available, need {n_extra}")
        sel = self._spread(n_extra, len(pool))
        return pool[sel]

    def mask_string(self) -> str:
        n1, n2 = self._keep_per_stream
        return (f"rate={self.target_rate};K={self.block_length};"
                f"p1={n1};p2={n2};spread=even")

    @classmethod
    def from_mask_string(cls, text: str) -> "RateMatcher":
        fields = dict(part.split("=", 1) for part in text.split(";"))
        matcher = cls.for_rate(fields["rate"], int(fields["K"]))
        n1, n2 = matcher._keep_per_stream
        if (n1, n2) != (int(fields["p1"]), int(fields["p2"])):
            raise ValueError("mask string inconsistent with its rate/K")
        return matcher


def effective_rate_with_extension(matcher: RateMatcher, n_extra: int) -> float:
    return matcher.block_length / (matcher.n_transmitted + n_extra)


def extension_bits_for_rate(matcher: RateMatcher, target) -> int:
    """Extra parity bits needed to move the realized rate to ``target``."""
    n_total = round(matcher.block_length / Fraction(target))
    return max(0, n_total - matcher.n_transmitted)


def place_rate_improvement_parity(parity_bits: np.ndarray, freed_bins,
                                  frame: ResourceGrid,
                                  constellation: Constellation) -> ResourceGrid:
    """Map extra parity bits onto freed subcarriers of the estimation symbol.

    ``freed_bins`` index the estimation symbol's grid vector (used-bin
    order).  Unused freed bins are left untouched.
    """
    freed = list(freed_bins)
    parity_bits = np.asarray(parity_bits, dtype=np.int64).ravel()
    n_syms = -(-len(parity_bits) // constellation.bits_per_symbol) \
        if len(parity_bits) else 0
    if len(parity_bits) % constellation.bits_per_symbol:
        raise ValueError("parity bit count must fill whole symbols")
    if n_syms > len(freed):
        raise ValueError(
            f"{n_syms} parity symbols exceed {len(freed)} freed subcarriers")
    try:
        est_pos = frame.symbol_indices.index(0)
    except ValueError:
        raise ValueError("frame has no estimation symbol") from None
    symbols = [s.copy() for s in frame.symbols]
    if n_syms:
        symbols[est_pos][np.asarray(freed[:n_syms])] = map_bits(
            parity_bits, constellation)
    return ResourceGrid(symbols=symbols,
                        symbol_indices=list(frame.symbol_indices))
