"""Pilot sequences and placements for joint and orthogonal estimation schemes.

A plan lives on a ``bin_domain``: the ordered absolute FFT bins it may touch
(the used subcarriers for frame experiments; all N bins for the pure
estimation-form experiments).  Per-tower ``positions`` index into that domain.

Sequence families:

* ``zc``           - Zadoff-Chu with distinct coprime roots (pseudo-orthogonal).
* ``random_qpsk``  - seeded random QPSK redrawn until all pairwise correlations
                     clear the threshold ("low correlation" pilots).
* ``cyclic_shift`` - one flat sequence per tower with a progressive phase slope
                     exp(-j 2 pi k m s / N); on a full-band domain with
                     s = floor(N/M) >= L the joint design matrix has an exactly
                     diagonal Gram, i.e. the pilots are orthogonal in the code
                     domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

PILOT_FAMILIES = ("zc", "random_qpsk", "cyclic_shift")


class PilotFeasibilityError(ValueError):
    """The joint estimator needs strictly more pilot bins than unknowns."""


@dataclass(frozen=True)
class PilotPlan:
    scheme: str                     # "joint" | "orthogonal"
    bin_domain: tuple[int, ...]     # absolute FFT bins, plan-wide
    positions: tuple[tuple[int, ...], ...]   # per tower, indices into bin_domain
    sequences: tuple[np.ndarray, ...] = field(repr=False)
    boost: float = 1.0
    family: str = "zc"
    freed_positions: tuple[int, ...] = ()    # reduced joint plan only

    def __post_init__(self):
        if self.scheme not in ("joint", "orthogonal"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for pos, seq in zip(self.positions, self.sequences):
            if len(pos) != len(seq):
                raise ValueError("sequence length must match position count")

    @property
    def n_towers(self) -> int:
        return len(self.positions)

    @property
    def n_pilots_total(self) -> int:
        """Pilot bins available to the estimator (shared bins count once)."""
        return len(set().union(*[set(p) for p in self.positions]))

    def absolute_rows(self, tower: int) -> np.ndarray:
        dom = np.asarray(self.bin_domain, dtype=np.int64)
        return dom[np.asarray(self.positions[tower], dtype=np.int64)]

    def amplitude(self, tower: int) -> np.ndarray:
        """Transmitted pilot values (sequence times boost) for one tower."""
        return self.sequences[tower] * self.boost


def _max_cross_correlation(sequences) -> float:
    worst = 0.0
    for a in range(len(sequences)):
        for b in range(a + 1, len(sequences)):
            n = len(sequences[a])
            c = abs(np.vdot(sequences[a], sequences[b])) / n
            worst = max(worst, c)
    return worst


def zadoff_chu(root: int, length: int) -> np.ndarray:
    """Unit-amplitude ZC sequence; even lengths use the n^2 exponent form."""
    n = np.arange(length)
    if length % 2:
        phase = -np.pi * root * n * (n + 1) / length
    else:
        phase = -np.pi * root * n * n / length
    return np.exp(1j * phase)


def _coprime_roots(m: int, length: int) -> list[int]:
    roots = []
    u = 1
    while len(roots) < m:
        if math.gcd(u, length) == 1:
            roots.append(u)
        u += 1
    return roots


def _joint_sequences(m: int, n_pilots: int, seed: int, family: str,
                     max_cross_corr: float) -> tuple[np.ndarray, ...]:
    if family == "zc":
        seqs = tuple(zadoff_chu(u, n_pilots) for u in _coprime_roots(m, n_pilots))
    elif family == "random_qpsk":
        rng = np.random.default_rng(seed)
        qpsk = np.exp(1j * np.pi / 4) * np.array([1, 1j, -1, -1j])
        for _ in range(1000):
            seqs = tuple(qpsk[rng.integers(0, 4, n_pilots)] for _ in range(m))
            if m == 1 or _max_cross_correlation(seqs) < max_cross_corr:
                break
        else:
            raise ValueError(
                f"could not draw {m} QPSK pilots of length {n_pilots} with "
                f"pairwise correlation < {max_cross_corr}")
    else:
        raise ValueError(f"family {family!r} not valid for partial-band joint plans")
    if m > 1 and _max_cross_correlation(seqs) >= max_cross_corr:
        raise ValueError(
            f"pilot family {family!r} misses the cross-correlation bound "
            f"{max_cross_corr} at length {n_pilots}")
    return seqs


def make_joint_plan(m: int, pilot_positions, seed: int = 0, *,
                    bin_domain, family: str = "zc",
                    max_cross_corr: float = 0.1) -> PilotPlan:
    """Pilot-on-pilot plan: every tower transmits on the same bins.

    For ``cyclic_shift`` the positions must cover the whole domain and the
    domain must be the full FFT range, since exact code-domain orthogonality
    relies on full geometric sums.
    """
    positions = tuple(int(p) for p in pilot_positions)
    bin_domain = tuple(int(b) for b in bin_domain)
    n_pilots = len(positions)
    if any(not 0 <= p < len(bin_domain) for p in positions):
        raise ValueError("pilot position outside the bin domain")
    if family == "cyclic_shift":
        n = len(bin_domain)
        if positions != tuple(range(n)) or bin_domain != tuple(range(n)):
            raise ValueError("cyclic_shift pilots require a full-band plan")
        shift = n // m
        k = np.arange(n)
        seqs = tuple(np.exp(-2j * np.pi * k * (t * shift) / n) for t in range(m))
    else:
        seqs = _joint_sequences(m, n_pilots, seed, family, max_cross_corr)
    return PilotPlan(scheme="joint", bin_domain=bin_domain,
                     positions=tuple([positions] * m), sequences=seqs,
                     boost=1.0, family=family)


def make_orthogonal_plan(m: int, n_bins: int, boost: float = 1.0, *,
                         bin_domain) -> PilotPlan:
    """Frequency-disjoint plan: tower t pilots the bins {t, t+M, t+2M, ...}.

    Each tower gets floor(n_bins / M) pilots of unit amplitude (times the
    boost); the other towers leave those bins empty.
    """
    if m > n_bins:
        raise ValueError("more towers than available bins")
    bin_domain = tuple(int(b) for b in bin_domain)
    if len(bin_domain) < n_bins:
        raise ValueError("bin domain smaller than n_bins")
    per_tower = n_bins // m
    positions = tuple(tuple(range(t, t + m * per_tower, m)) for t in range(m))
    seqs = tuple(np.ones(per_tower, dtype=complex) for _ in range(m))
    return PilotPlan(scheme="orthogonal", bin_domain=bin_domain,
                     positions=positions, sequences=seqs,
                     boost=float(boost), family="flat")


def make_reduced_joint_plan(m: int, n_used: int, seed: int = 0, *,
                            bin_domain, family: str = "zc",
                            max_cross_corr: float | None = None) -> PilotPlan:
    """Joint pilots confined to tower-0's interleaved set, freeing the rest.

    The freed positions (everything outside the shared set) are reported on
    the plan so the FEC layer can fill them with extra parity symbols.  Small
    shared sets cannot reach the full-band cross-correlation bound, so the
    default bound scales as 2/sqrt(N_p).
    """
    shared = tuple(range(0, m * (n_used // m), m))
    if max_cross_corr is None:
        max_cross_corr = max(0.1, 2.0 / math.sqrt(len(shared)))
    base = make_joint_plan(m, shared, seed, bin_domain=bin_domain,
                           family=family, max_cross_corr=max_cross_corr)
    freed = tuple(p for p in range(n_used) if p not in set(shared))
    return PilotPlan(scheme="joint", bin_domain=base.bin_domain,
                     positions=base.positions, sequences=base.sequences,
                     boost=1.0, family=family, freed_positions=freed)


def check_feasible(plan: PilotPlan, l_taps: int) -> None:
    """Enforce L*M < N_p, the joint-estimability condition."""
    if plan.scheme == "joint":
        n_p = len(plan.positions[0])
        if l_taps * plan.n_towers >= n_p:
            raise PilotFeasibilityError(
                f"L*M = {l_taps * plan.n_towers} must be < N_p = {n_p}")
    else:
        for t in range(plan.n_towers):
            if l_taps >= len(plan.positions[t]):
                raise PilotFeasibilityError(
                    f"tower {t}: L = {l_taps} must be < its {len(plan.positions[t])} pilots")


def total_pilot_energy(plan: PilotPlan) -> float:
    """Total transmitted pilot-symbol energy summed over towers."""
    return float(sum(np.sum(np.abs(plan.amplitude(t)) ** 2)
                     for t in range(plan.n_towers)))
