"""Scenario-driven Monte Carlo engine for MSE and BLER experiments.

Determinism contract: trial t of sweep point p runs on a generator seeded by
SeedSequence([master_seed, blake2s(scenario_id), p, t]).  Trials are processed
in fixed-size batches; early stopping is decided only at batch boundaries and
per-trial results are reduced in trial order, so results are byte-identical
for any worker count.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .. import cfo as cfo_mod
from ..channel import (NoiseModel, PowerDelayProfile, TowerLink, add_awgn,
                       apply_downlink, estimate_noise_variance, realize_cir)
from ..detection import (Constellation, detect_symbol_llrs, make_constellation,
                         map_bits)
from ..estimation import (JmlsOperator, default_alpha, mse_cfr_per_bin,
                          mse_total, omls_estimate, truth_estimate_set)
from ..fec import (RateMatcher, TurboConfig, extension_bits_for_rate,
                   turbo_decode, turbo_encode)
from ..ofdm import (OfdmConfig, modulate_symbols, symbol_spectrum,
                    symmetric_used_subcarriers)
from ..pilots import (PilotPlan, make_joint_plan, make_orthogonal_plan,
                      make_reduced_joint_plan)
from .config import ScenarioConfig
from .records import MetricRecord


def scenario_hash(scenario_id: str) -> int:
    """Stable 64-bit hash of the scenario id, part of the seed chain."""
    digest = hashlib.blake2s(scenario_id.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def trial_rng(master_seed: int, scenario_id: str, point_index: int,
              trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(
        [master_seed, scenario_hash(scenario_id), point_index, trial_index])
    return np.random.Generator(np.random.PCG64(ss))


@dataclass
class Runtime:
    """Everything derivable from a scenario before the first trial."""

    scn: ScenarioConfig
    ofdm: OfdmConfig
    pdps: tuple[PowerDelayProfile, ...]
    extra_delays_s: tuple[float, ...]
    l_taps: int
    plan: PilotPlan
    eps_max: float
    phys_constellations: tuple[Constellation, ...]
    det_constellations: tuple[Constellation, ...]
    turbo: TurboConfig | None
    matcher: RateMatcher | None
    ext_indices: np.ndarray | None
    n_fill_res: int
    effective_rate: float
    bits_per_symbol: int
    est_grids: tuple[np.ndarray, ...]    # per-tower estimation-symbol payloads
    pilot_rows: np.ndarray               # absolute bins feeding the estimator
    jmls_op_zero_cfo: JmlsOperator | None
    # Per-frame estimation solves reuse these (alpha still varies per frame).
    frame_designs: tuple = ()            # (design, gram_base, y-slice) blocks
    chan_perm: np.ndarray | None = None  # coded-bit channel interleaver


def _resolve_l(scn: ScenarioConfig, ofdm: OfdmConfig,
               pdps, extra_delays_s) -> int:
    mode = scn.estimator.l_mode
    if mode == "fixed":
        return scn.estimator.l_taps
    if mode == "ncp":
        return ofdm.n_cp
    t_max = max(max(p.delays_s) + d for p, d in zip(pdps, extra_delays_s))
    return int(round(t_max * ofdm.sample_rate_hz)) + 1


def _build_plan(scn: ScenarioConfig, ofdm: OfdmConfig) -> PilotPlan:
    p = scn.pilots
    if p.full_band:
        domain = tuple(range(ofdm.n_fft))
    else:
        domain = ofdm.used_subcarriers
    m = scn.towers.count
    if p.scheme == "joint":
        return make_joint_plan(m, range(len(domain)), p.seed,
                               bin_domain=domain, family=p.family)
    if p.scheme == "orthogonal":
        return make_orthogonal_plan(m, len(domain), p.boost, bin_domain=domain)
    return make_reduced_joint_plan(m, len(domain), p.seed,
                                   bin_domain=domain, family=p.family)


@lru_cache(maxsize=8)
def build_runtime(scn: ScenarioConfig) -> Runtime:
    """Resolve a scenario into its immutable runtime state (cached)."""
    o = scn.ofdm
    ofdm = OfdmConfig(
        n_fft=o.n_fft, n_cp=o.n_cp,
        used_subcarriers=symmetric_used_subcarriers(o.n_fft, o.n_used),
        sample_rate_hz=o.sample_rate_hz, frame_period_p=o.frame_period)
    pdps = tuple(PowerDelayProfile.preset(name, scn.towers.pdp_delay_scale)
                 for name in scn.towers.pdp)
    extra_delays_s = tuple(d * 1e-9 for d in scn.towers.extra_delay_ns)
    l_taps = _resolve_l(scn, ofdm, pdps, extra_delays_s)
    plan = _build_plan(scn, ofdm)
    eps_max = scn.cfo.max_offset_hz / ofdm.subcarrier_spacing_hz

    m = scn.towers.count
    c_des = make_constellation(scn.detector.desired_order)
    c_int = make_constellation(scn.detector.interferer_order)
    phys = (c_des,) + (c_int,) * (m - 1)
    det = phys if scn.detector.kind == "ocjllr" else (c_des,)

    turbo = matcher = ext_idx = chan_perm = None
    n_fill_res = 0
    effective_rate = 1.0
    bits_per_symbol = c_des.bits_per_symbol
    if scn.kind == "bler":
        turbo = TurboConfig(block_length=scn.fec.block_length,
                            iterations=scn.fec.iterations,
                            interleaver_seed=scn.fec.interleaver_seed)
        matcher = RateMatcher.for_rate(scn.fec.rate, scn.fec.block_length)
        if scn.fec.channel_interleaver:
            n_padded = matcher.n_transmitted
            n_padded += (-n_padded) % bits_per_symbol
            chan_perm = np.random.default_rng(
                scn.fec.interleaver_seed + 0x5A17).permutation(n_padded)
        effective_rate = matcher.realized_rate
        if scn.fec.parity_fill:
            n_ext = extension_bits_for_rate(matcher, scn.fec.fill_rate)
            n_ext = -(-n_ext // bits_per_symbol) * bits_per_symbol
            n_fill_res = n_ext // bits_per_symbol
            if n_fill_res > len(plan.freed_positions):
                raise ValueError(
                    f"parity fill needs {n_fill_res} freed subcarriers, plan "
                    f"frees {len(plan.freed_positions)}")
            ext_idx = matcher.extension_indices(n_ext)
            effective_rate = matcher.block_length / (matcher.n_transmitted + n_ext)

    # Static per-tower estimation-symbol payloads over the plan's domain.
    est_grids = []
    for t in range(m):
        g = np.zeros(len(plan.bin_domain), dtype=complex)
        g[np.asarray(plan.positions[t], dtype=np.int64)] = plan.amplitude(t)
        est_grids.append(g)

    if scn.pilots.scheme == "orthogonal":
        rows = sorted(set().union(*[set(plan.absolute_rows(t).tolist())
                                    for t in range(m)]))
        pilot_rows = np.asarray(rows, dtype=np.int64)
    else:
        pilot_rows = plan.absolute_rows(0)

    jmls_op = None
    if scn.kind == "mse" and scn.sim_path == "estimation_form" \
            and scn.estimator.kind == "jmls":
        alpha = _resolve_alpha(scn, plan, l_taps, ofdm, noise_sigma2=0.0)
        jmls_op = JmlsOperator(plan, l_taps, alpha, ofdm)

    # Precompute the per-frame least-squares blocks: for the joint scheme one
    # block over the shared rows, for the orthogonal scheme one per tower.
    from ..estimation import _joint_design
    from ..numerics import dft_submatrix
    designs = []
    if scn.estimator.kind == "jmls":
        a = _joint_design(plan, l_taps, ofdm)
        designs.append((a, a.conj().T @ a, slice(0, a.shape[0])))
    else:
        row_of = {int(r): j for j, r in enumerate(pilot_rows)}
        for t in range(m):
            rows_t = plan.absolute_rows(t)
            f_l = dft_submatrix(ofdm.n_fft, rows_t, l_taps).entries
            a_t = plan.amplitude(t)[:, None] * f_l
            sel = np.asarray([row_of[int(r)] for r in rows_t], dtype=np.int64)
            designs.append((a_t, a_t.conj().T @ a_t, sel))

    return Runtime(scn=scn, ofdm=ofdm, pdps=pdps,
                   extra_delays_s=extra_delays_s, l_taps=l_taps, plan=plan,
                   eps_max=eps_max, phys_constellations=phys,
                   det_constellations=det, turbo=turbo, matcher=matcher,
                   ext_indices=ext_idx, n_fill_res=n_fill_res,
                   effective_rate=effective_rate,
                   bits_per_symbol=bits_per_symbol,
                   est_grids=tuple(est_grids), pilot_rows=pilot_rows,
                   jmls_op_zero_cfo=jmls_op, frame_designs=tuple(designs),
                   chan_perm=chan_perm)


def _resolve_alpha(scn: ScenarioConfig, plan, l_taps, ofdm,
                   noise_sigma2: float) -> float:
    if scn.estimator.alpha_mode == "fixed":
        return scn.estimator.alpha
    return default_alpha(plan, l_taps, ofdm, noise_sigma2)


def derive_sigma2(eb_n0_db: float, scn: ScenarioConfig) -> float:
    """Per-bin (frequency-domain) noise variance for a sweep point.

    sigma2 = E_sym / (rate * bits_per_symbol * 10^(EbN0/10)) with E_sym = 1,
    the average desired-signal energy per used subcarrier.  MSE experiments
    use rate 1 and the QPSK pilot's 2 bits; BLER experiments use the realized
    code rate (parity fill included) and the desired constellation.
    """
    rt = build_runtime(scn)
    if scn.kind == "bler":
        rate, bits = rt.effective_rate, rt.bits_per_symbol
    else:
        rate, bits = 1.0, 2
    if rate <= 0:
        raise ValueError("nonpositive code rate")
    return 1.0 / (rate * bits * 10.0 ** (eb_n0_db / 10.0))


# ---------------------------------------------------------------------------
# Per-trial physics


def _draw_cirs(rt: Runtime, rng: np.random.Generator) -> list[np.ndarray]:
    scn = rt.scn
    return [realize_cir(pdp, delay, power, rt.ofdm.sample_rate_hz, rng,
                        n_cp=rt.ofdm.n_cp)
            for pdp, delay, power in zip(rt.pdps, rt.extra_delays_s,
                                         scn.towers.power_db)]


def _draw_eps(rt: Runtime, rng: np.random.Generator) -> np.ndarray:
    """Per-frame normalized CFOs: tower 0 optionally locked to the serving
    carrier, interferers uniform in [0, eps_max] (one common sign)."""
    m = rt.scn.towers.count
    eps = rng.uniform(0.0, rt.eps_max, size=m) if rt.eps_max > 0 \
        else np.zeros(m)
    if rt.scn.cfo.desired_locked:
        eps[0] = 0.0
    return eps


def _links(rt: Runtime, cirs, eps) -> list[TowerLink]:
    spacing = rt.ofdm.subcarrier_spacing_hz
    return [TowerLink(tower_id=t, cir=cirs[t],
                      extra_delay_s=rt.extra_delays_s[t],
                      cfo_hz=eps[t] * spacing, eps=eps[t],
                      power_db=rt.scn.towers.power_db[t])
            for t in range(len(cirs))]


def _estimate_frame(rt: Runtime, est_spectrum: np.ndarray, sigma2_freq: float):
    """Channel estimates from one estimation symbol's full spectrum.

    Runs the same regularized solves as jmls_estimate/omls_estimate but on
    design blocks precomputed in the runtime.
    """
    from ..estimation import estimate_set_from_stacked
    from ..numerics import solve_regularized_gram
    y_pilot = est_spectrum[rt.pilot_rows]
    alpha = _resolve_alpha(rt.scn, rt.plan, rt.l_taps, rt.ofdm, sigma2_freq)
    parts = []
    for a, gram_base, sel in rt.frame_designs:
        gram = gram_base + alpha * np.eye(gram_base.shape[0]) if alpha > 0 \
            else gram_base
        rhs = a.conj().T @ y_pilot[sel]
        parts.append(solve_regularized_gram(gram, rhs,
                                            unregularized=alpha == 0))
    stacked = parts[0] if len(parts) == 1 else np.concatenate(parts)
    return estimate_set_from_stacked(stacked, rt.l_taps, alpha, rt.ofdm)


def _simulate_frame(rt: Runtime, tower_grids: list[list[np.ndarray]],
                    sigma2_freq: float, eps: np.ndarray, eps_star: float,
                    cirs, rng) -> list[np.ndarray]:
    """Modulate, propagate, derotate one frame; return per-symbol spectra."""
    ofdm = rt.ofdm
    streams = []
    for grids in tower_grids:
        streams.append(modulate_symbols(np.vstack(grids), ofdm).ravel())
    links = _links(rt, cirs, eps)
    rx = apply_downlink(streams, links, ofdm, symbol_index_i=0)
    if sigma2_freq > 0:
        rx = add_awgn(rx, NoiseModel(sigma2_freq / ofdm.n_fft), rng)
    rx = cfo_mod.derotate_stream(rx, eps_star, 0, ofdm)
    n_sym = len(tower_grids[0])
    return [symbol_spectrum(rx[j * ofdm.symbol_len:(j + 1) * ofdm.symbol_len],
                            ofdm) for j in range(n_sym)]


def _noise_estimate(rt: Runtime, spectra, sigma2_freq: float) -> float:
    """Frequency-domain effective noise variance for estimator and detector."""
    if rt.scn.detector.noise_est == "oracle":
        return sigma2_freq
    guards = rt.ofdm.guard_bins
    per_sym = [estimate_noise_variance(s, guards) for s in spectra]
    return float(np.mean(per_sym)) * rt.ofdm.n_fft


# ---------------------------------------------------------------------------
# MSE trials


def _mse_trial_estimation_form(rt: Runtime, sigma2: float,
                               rng: np.random.Generator) -> dict[str, float]:
    from ..estimation import _stacked_design  # row order shared with omls
    cirs = _draw_cirs(rt, rng)
    truth = truth_estimate_set(cirs, rt.l_taps, rt.ofdm)
    if rt.scn.estimator.kind == "jmls":
        op = rt.jmls_op_zero_cfo
        a = op.design
        y = a @ truth.stacked_cir
        y = y + math.sqrt(sigma2 / 2) * (rng.standard_normal(len(y))
                                         + 1j * rng.standard_normal(len(y)))
        est = op.estimate(y)
    else:
        a, _rows = _stacked_design(rt.plan, rt.l_taps, rt.ofdm)
        y = a @ truth.stacked_cir
        y = y + math.sqrt(sigma2 / 2) * (rng.standard_normal(len(y))
                                         + 1j * rng.standard_normal(len(y)))
        alpha = _resolve_alpha(rt.scn, rt.plan, rt.l_taps, rt.ofdm, sigma2)
        est = omls_estimate(y, rt.plan, rt.l_taps, alpha, rt.ofdm)
    return {"mse_cir_total": mse_total(est, truth),
            "mse_cfr_per_bin": mse_cfr_per_bin(est, truth)}


def _mse_trial_time_domain(rt: Runtime, sigma2: float,
                           rng: np.random.Generator) -> dict[str, float]:
    cirs = _draw_cirs(rt, rng)
    eps = _draw_eps(rt, rng)
    eps_star = cfo_mod.derotation_offset(eps, rt.scn.cfo.derotation, rt.eps_max)
    eps_res = eps - eps_star
    grids = [[g] for g in rt.est_grids]
    spectra = _simulate_frame(rt, grids, sigma2, eps, eps_star, cirs, rng)
    sigma2_eff = _noise_estimate(rt, spectra, sigma2)
    est = _estimate_frame(rt, spectra[0], sigma2_eff)
    scale = [cfo_mod.modified_cfr_factor(e, rt.ofdm) for e in eps_res]
    truth = truth_estimate_set(cirs, rt.l_taps, rt.ofdm, scale_per_tower=scale)
    return {"mse_cir_total": mse_total(est, truth),
            "mse_cfr_per_bin": mse_cfr_per_bin(est, truth)}


def run_mse_trial(scn: ScenarioConfig, point_index: int, trial_index: int,
                  sigma2: float) -> dict[str, float]:
    rt = build_runtime(scn)
    rng = trial_rng(scn.master_seed, scn.scenario_id, point_index, trial_index)
    if scn.sim_path == "estimation_form":
        return _mse_trial_estimation_form(rt, sigma2, rng)
    return _mse_trial_time_domain(rt, sigma2, rng)


# ---------------------------------------------------------------------------
# BLER trials


def _random_symbols(c: Constellation, n: int, rng) -> np.ndarray:
    return c.points[rng.integers(0, c.order, n)]


def simulate_block(scn: ScenarioConfig, point_index: int, trial_index: int,
                   sigma2: float) -> bool:
    """Run one coded transport block end to end; True means block error."""
    rt = build_runtime(scn)
    rng = trial_rng(scn.master_seed, scn.scenario_id, point_index, trial_index)
    ofdm = rt.ofdm
    n_used = ofdm.n_used
    p = ofdm.frame_period_p
    c0 = rt.phys_constellations[0]
    bits_per = rt.bits_per_symbol
    m = scn.towers.count

    info = rng.integers(0, 2, rt.turbo.block_length)
    codeword = turbo_encode(info, rt.turbo)
    tx_bits = rt.matcher.puncture(codeword)
    n_tx = len(tx_bits)
    pad = (-n_tx) % bits_per
    padded = np.concatenate([tx_bits, rng.integers(0, 2, pad)])
    if rt.chan_perm is not None:
        padded = padded[rt.chan_perm]
    block_syms = map_bits(padded, c0)
    n_block_res = len(block_syms)

    ext_syms = None
    if rt.ext_indices is not None:
        ext_bits = codeword[rt.ext_indices]
        ext_syms = map_bits(ext_bits, c0)

    n_data_syms_total = -(-n_block_res // n_used)
    fill_pos = np.asarray(rt.plan.freed_positions[:rt.n_fill_res],
                          dtype=np.int64)

    llr_rows = []
    ext_llrs = None
    res_done = 0
    frame_idx = 0
    while res_done < n_block_res:
        n_data_this = min(p - 1, n_data_syms_total - frame_idx * (p - 1))
        cirs = _draw_cirs(rt, rng)
        eps = _draw_eps(rt, rng)
        eps_star = cfo_mod.derotation_offset(eps, scn.cfo.derotation, rt.eps_max)
        eps_res = eps - eps_star

        tower_grids: list[list[np.ndarray]] = []
        for t in range(m):
            est = rt.est_grids[t].copy()
            if rt.n_fill_res:
                if t == 0 and frame_idx == 0 and ext_syms is not None:
                    est[fill_pos] = ext_syms
                elif t > 0:
                    est[fill_pos] = _random_symbols(
                        rt.phys_constellations[t], rt.n_fill_res, rng)
            tower_grids.append([est])
        for j in range(n_data_this):
            lo = (frame_idx * (p - 1) + j) * n_used
            des = np.empty(n_used, dtype=complex)
            take = max(0, min(n_used, n_block_res - lo))
            des[:take] = block_syms[lo:lo + take]
            if take < n_used:
                des[take:] = _random_symbols(c0, n_used - take, rng)
            tower_grids[0].append(des)
            for t in range(1, m):
                tower_grids[t].append(_random_symbols(
                    rt.phys_constellations[t], n_used, rng))

        spectra = _simulate_frame(rt, tower_grids, sigma2, eps, eps_star,
                                  cirs, rng)
        sigma2_eff = _noise_estimate(rt, spectra, sigma2)
        est = _estimate_frame(rt, spectra[0], sigma2_eff)
        cfr = est.cfr_matrix
        det_cfr = cfr if scn.detector.kind == "ocjllr" else cfr[:1]
        det_eps = eps_res + scn.cfo.detector_eps_error
        n_det = det_cfr.shape[0]

        if rt.n_fill_res and frame_idx == 0 and ext_syms is not None:
            y_est_used = spectra[0][ofdm.used_array]
            ext_llr_rows = detect_symbol_llrs(
                y_est_used[fill_pos], det_cfr[:, fill_pos],
                np.ones(n_det, dtype=complex), sigma2_eff,
                rt.det_constellations)
            ext_llrs = ext_llr_rows.ravel()

        for j in range(n_data_this):
            i_sym = j + 1
            ramps = np.array([cfo_mod.phase_ramp(det_eps[t], i_sym, ofdm)
                              for t in range(n_det)])
            y_used = spectra[i_sym][ofdm.used_array]
            llr_rows.append(detect_symbol_llrs(
                y_used, det_cfr, ramps, sigma2_eff, rt.det_constellations))
        res_done += n_data_this * n_used
        frame_idx += 1

    llr_flat = np.concatenate([r.ravel() for r in llr_rows])
    if rt.chan_perm is not None:
        deinterleaved = np.empty_like(llr_flat)
        deinterleaved[rt.chan_perm] = llr_flat[:len(rt.chan_perm)]
        llr_flat = deinterleaved
    full = rt.matcher.depuncture(llr_flat[:n_tx])
    if ext_llrs is not None:
        full[rt.ext_indices] = ext_llrs[:len(rt.ext_indices)]
    decoded, _ = turbo_decode(full, rt.turbo)
    return not np.array_equal(decoded, info)


# ---------------------------------------------------------------------------
# Experiment drivers


def _map_trials(fn, scn, point_index, trial_indices, sigma2, workers,
                executor):
    if executor is None or workers <= 1:
        return [fn(scn, point_index, t, sigma2) for t in trial_indices]
    chunk = max(1, math.ceil(len(trial_indices) / workers))
    futures = []
    for lo in range(0, len(trial_indices), chunk):
        sub = trial_indices[lo:lo + chunk]
        futures.append(executor.submit(_run_chunk, fn.__name__, scn,
                                       point_index, sub, sigma2))
    out = []
    for f in futures:
        out.extend(f.result())
    return out


_CHUNK_FNS = {}


def _run_chunk(fn_name, scn, point_index, trial_indices, sigma2):
    fn = _CHUNK_FNS[fn_name]
    return [fn(scn, point_index, t, sigma2) for t in trial_indices]


def run_mse_experiment(scn: ScenarioConfig, workers: int = 1) -> list[MetricRecord]:
    """Per-Eb/N0 MSE records with the matching CRLB value attached."""
    from ..estimation import crlb_general
    if scn.kind != "mse":
        raise ValueError("scenario kind must be 'mse'")
    rt = build_runtime(scn)
    records = []
    with _pool(workers) as executor:
        for p_idx, eb in enumerate(scn.sweep.eb_n0_db):
            sigma2 = derive_sigma2(eb, scn)
            trials = list(range(scn.trials.mse_trials))
            results = _map_trials(run_mse_trial, scn, p_idx, trials, sigma2,
                                  workers, executor)
            crlb = crlb_general(rt.plan, rt.l_taps, sigma2, rt.ofdm)
            for kind in scn.metrics:
                total = 0.0
                for r in results:          # fixed trial order
                    total += r[kind]
                records.append(MetricRecord(
                    scenario_id=scn.scenario_id, metric_kind=kind,
                    eb_n0_db=eb, value=total / len(results),
                    crlb_value=crlb if kind == "mse_cir_total" else None,
                    trials=len(results), seed=scn.master_seed))
    return records


def run_bler_experiment(scn: ScenarioConfig, workers: int = 1) -> list[MetricRecord]:
    """Per-Eb/N0 BLER with batch-wise early stopping."""
    if scn.kind != "bler":
        raise ValueError("scenario kind must be 'bler'")
    build_runtime(scn)
    records = []
    tr = scn.trials
    with _pool(workers) as executor:
        for p_idx, eb in enumerate(scn.sweep.eb_n0_db):
            sigma2 = derive_sigma2(eb, scn)
            errors = 0
            trials = 0
            while trials < tr.max_blocks:
                hi = min(trials + tr.batch_size, tr.max_blocks)
                batch = list(range(trials, hi))
                results = _map_trials(simulate_block, scn, p_idx, batch,
                                      sigma2, workers, executor)
                errors += sum(bool(r) for r in results)
                trials = hi
                if tr.target_error_blocks and errors >= tr.target_error_blocks:
                    break
            records.append(MetricRecord(
                scenario_id=scn.scenario_id, metric_kind="bler", eb_n0_db=eb,
                value=errors / trials, trials=trials, error_blocks=errors,
                seed=scn.master_seed))
    return records


def run_scenario(scn: ScenarioConfig, workers: int = 1) -> list[MetricRecord]:
    if scn.kind == "mse":
        return run_mse_experiment(scn, workers)
    return run_bler_experiment(scn, workers)


class _NullPool:
    def __enter__(self):
        return None

    def __exit__(self, *exc):
        return False


def _pool(workers: int):
    if workers <= 1:
        return _NullPool()
    return ProcessPoolExecutor(max_workers=workers)


_CHUNK_FNS["run_mse_trial"] = run_mse_trial
_CHUNK_FNS["simulate_block"] = simulate_block
