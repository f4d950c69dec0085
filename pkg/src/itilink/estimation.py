"""Joint and orthogonal modified-LS channel estimators, CRLB, MSE metrics.

The joint estimator solves the stacked linear model

    Y = [X_0 F_L | X_1 F_L | ... | X_{M-1} F_L] h + W

over the plan's pilot bins in one ridge-regularized least-squares problem,
recovering all M towers' L-tap CIRs simultaneously.  The orthogonal baseline
solves M independent per-tower problems on disjoint bins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import dft_submatrix, solve_regularized_gram
from .ofdm import OfdmConfig
from .pilots import PilotPlan, check_feasible


@dataclass(frozen=True)
class ChannelEstimateSet:
    """Stacked per-tower CIR estimates and the derived CFRs."""

    stacked_cir: np.ndarray = field(repr=False)
    per_tower_cir: tuple[np.ndarray, ...] = field(repr=False)
    per_tower_cfr: tuple[np.ndarray, ...] = field(repr=False)
    l_taps: int
    regularization: float

    @property
    def n_towers(self) -> int:
        return len(self.per_tower_cir)

    @property
    def cfr_matrix(self) -> np.ndarray:
        """(M, n_bins) CFR array, the detector's working form."""
        return np.vstack(self.per_tower_cfr)


def estimate_set_from_stacked(stacked: np.ndarray, l_taps: int, alpha: float,
                              cfg: OfdmConfig) -> ChannelEstimateSet:
    """Split a stacked L*M CIR vector and attach CFRs over the used bins."""
    m = len(stacked) // l_taps
    cirs = tuple(stacked[l_taps * t: l_taps * (t + 1)] for t in range(m))
    f_used = dft_submatrix(cfg.n_fft, cfg.used_subcarriers, l_taps).entries
    cfrs = tuple(f_used @ c for c in cirs)
    return ChannelEstimateSet(stacked_cir=stacked, per_tower_cir=cirs,
                              per_tower_cfr=cfrs, l_taps=l_taps,
                              regularization=alpha)


def truth_estimate_set(cirs, l_taps: int, cfg: OfdmConfig,
                       scale_per_tower=None) -> ChannelEstimateSet:
    """Pack true CIRs (zero-padded to L taps, optionally scaled) for MSE use.

    ``scale_per_tower`` carries the residual-CFO distortion factors that turn
    the physical CIRs into the estimable modified CIRs.
    """
    m = len(cirs)
    stacked = np.zeros(m * l_taps, dtype=complex)
    for t, cir in enumerate(cirs):
        if len(cir) > l_taps:
            raise ValueError(f"tower {t} CIR has {len(cir)} taps, L = {l_taps}")
        s = 1.0 if scale_per_tower is None else scale_per_tower[t]
        stacked[t * l_taps: t * l_taps + len(cir)] = s * np.asarray(cir)
    return estimate_set_from_stacked(stacked, l_taps, 0.0, cfg)


def _joint_design(plan: PilotPlan, l_taps: int, cfg: OfdmConfig) -> np.ndarray:
    rows = plan.absolute_rows(0)
    f_l = dft_submatrix(cfg.n_fft, rows, l_taps).entries
    blocks = [plan.amplitude(t)[:, None] * f_l for t in range(plan.n_towers)]
    return np.hstack(blocks)


def _stacked_design(plan: PilotPlan, l_taps: int, cfg: OfdmConfig) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and its absolute pilot rows for any plan scheme.

    Joint plans share one row set; orthogonal plans get block-orthogonal
    columns because every tower is silent on the other towers' bins.
    """
    if plan.scheme == "joint":
        return _joint_design(plan, l_taps, cfg), plan.absolute_rows(0)
    all_rows = sorted(set().union(*[set(plan.absolute_rows(t).tolist())
                                    for t in range(plan.n_towers)]))
    row_of = {r: j for j, r in enumerate(all_rows)}
    a = np.zeros((len(all_rows), plan.n_towers * l_taps), dtype=complex)
    for t in range(plan.n_towers):
        rows_t = plan.absolute_rows(t)
        f_l = dft_submatrix(cfg.n_fft, rows_t, l_taps).entries
        sel = [row_of[int(r)] for r in rows_t]
        a[sel, t * l_taps:(t + 1) * l_taps] = plan.amplitude(t)[:, None] * f_l
    return a, np.asarray(all_rows, dtype=np.int64)


class JmlsOperator:
    """Joint-mLS solver with the Gram matrix precomputed for reuse.

    Frames sharing (plan, L, alpha) can call :meth:`estimate` repeatedly; the
    one-shot :func:`jmls_estimate` wraps a throwaway instance, so both paths
    run identical arithmetic.
    """

    def __init__(self, plan: PilotPlan, l_taps: int, alpha: float,
                 cfg: OfdmConfig):
        check_feasible(plan, l_taps)
        if plan.scheme != "joint":
            raise ValueError("JmlsOperator requires a joint plan")
        self.plan = plan
        self.l_taps = l_taps
        self.alpha = float(alpha)
        self.cfg = cfg
        self.design = _joint_design(plan, l_taps, cfg)
        gram = self.design.conj().T @ self.design
        if self.alpha > 0:
            gram = gram + self.alpha * np.eye(gram.shape[0])
        self._gram = gram

    def estimate(self, y_pilot: np.ndarray) -> ChannelEstimateSet:
        if y_pilot.shape != (self.design.shape[0],):
            raise ValueError(
                f"expected {self.design.shape[0]} pilot observations")
        rhs = self.design.conj().T @ y_pilot
        stacked = solve_regularized_gram(self._gram, rhs,
                                         unregularized=self.alpha == 0)
        return estimate_set_from_stacked(stacked, self.l_taps, self.alpha,
                                         self.cfg)


def jmls_estimate(y_pilot: np.ndarray, plan: PilotPlan, l_taps: int,
                  alpha: float, cfg: OfdmConfig) -> ChannelEstimateSet:
    """Joint-mLS estimate of all towers' CIRs from shared-bin pilots."""
    return JmlsOperator(plan, l_taps, alpha, cfg).estimate(y_pilot)


def omls_estimate(y_pilot: np.ndarray, plan: PilotPlan, l_taps: int,
                  alpha: float, cfg: OfdmConfig) -> ChannelEstimateSet:
    """Orthogonal mLS: independent per-tower solves on disjoint pilot sets.

    ``y_pilot`` is ordered by ascending absolute bin over the union of all
    towers' pilot bins (the natural grid-extraction order).
    """
    if plan.scheme != "orthogonal":
        raise ValueError("omls_estimate requires an orthogonal plan")
    check_feasible(plan, l_taps)
    _, all_rows = _stacked_design(plan, l_taps, cfg)
    if y_pilot.shape != (len(all_rows),):
        raise ValueError(f"expected {len(all_rows)} pilot observations")
    row_of = {int(r): j for j, r in enumerate(all_rows)}
    m = plan.n_towers
    stacked = np.zeros(m * l_taps, dtype=complex)
    for t in range(m):
        rows_t = plan.absolute_rows(t)
        f_l = dft_submatrix(cfg.n_fft, rows_t, l_taps).entries
        a_t = plan.amplitude(t)[:, None] * f_l
        y_t = y_pilot[[row_of[int(r)] for r in rows_t]]
        gram = a_t.conj().T @ a_t
        if alpha > 0:
            gram = gram + alpha * np.eye(l_taps)
        stacked[t * l_taps:(t + 1) * l_taps] = solve_regularized_gram(
            gram, a_t.conj().T @ y_t, unregularized=alpha == 0)
    return estimate_set_from_stacked(stacked, l_taps, float(alpha), cfg)


def crlb_general(plan: PilotPlan, l_taps: int, sigma2: float,
                 cfg: OfdmConfig) -> float:
    """trace((F^H X^H X F)^{-1}) sigma2: the total-variance lower bound.

    Valid for any plan; for an orthogonal plan the block structure makes this
    the sum of the per-tower bounds.  ``sigma2`` is the per-bin
    (frequency-domain) noise variance of the pilot observations.
    """
    a, _ = _stacked_design(plan, l_taps, cfg)
    gram = a.conj().T @ a
    inv_diag = solve_regularized_gram(gram, np.eye(gram.shape[0], dtype=complex),
                                      unregularized=True)
    return float(np.real(np.trace(inv_diag)) * sigma2)


def default_alpha(plan: PilotPlan, l_taps: int, cfg: OfdmConfig,
                  noise_sigma2: float) -> float:
    """Noise-matched ridge for partial-band plans, numerical jitter otherwise.

    Plans whose pilots cover every FFT bin keep an essentially unregularized
    solve so the estimator stays bound-attaining; row-subsampled DFT designs
    get the noise-matched alpha = sigma2.
    """
    full_band = plan.n_pilots_total == cfg.n_fft
    if full_band:
        a = _joint_design(plan, l_taps, cfg) if plan.scheme == "joint" else \
            _stacked_design(plan, l_taps, cfg)[0]
        gram_trace = float(np.real(np.sum(np.abs(a) ** 2)))
        return 1e-12 * gram_trace / (l_taps * plan.n_towers)
    return float(noise_sigma2)


def mse_total(estimates: ChannelEstimateSet, truth: ChannelEstimateSet) -> float:
    """Total squared CIR error over all L*M entries."""
    if estimates.stacked_cir.shape != truth.stacked_cir.shape:
        raise ValueError("estimate/truth dimension mismatch")
    return float(np.sum(np.abs(estimates.stacked_cir - truth.stacked_cir) ** 2))


def mse_cfr_per_bin(estimates: ChannelEstimateSet, truth: ChannelEstimateSet) -> float:
    """CFR squared error averaged over bins and towers."""
    e = estimates.cfr_matrix
    t = truth.cfr_matrix
    if e.shape != t.shape:
        raise ValueError("estimate/truth dimension mismatch")
    return float(np.mean(np.abs(e - t) ** 2))
