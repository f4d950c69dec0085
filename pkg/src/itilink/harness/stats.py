"""Small statistics helpers for BLER comparisons."""

from __future__ import annotations

import math

import numpy as np


def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion (default 95%)."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = errors / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def intervals_separated(low_errors: int, low_trials: int,
                        high_errors: int, high_trials: int) -> bool:
    """True when the first rate's interval sits wholly below the second's."""
    lo = wilson_interval(low_errors, low_trials)
    hi = wilson_interval(high_errors, high_trials)
    return lo[1] < hi[0]


def ebn0_at_bler(eb_n0_db, bler, target: float) -> float | None:
    """Eb/N0 where a monotone-interpolated BLER curve crosses ``target``.

    Interpolates log10(BLER) linearly in Eb/N0 between the bracketing grid
    points.  Returns None when the curve never reaches the target within the
    grid (e.g. an error floor above it).
    """
    pts = sorted((float(x), float(y)) for x, y in zip(eb_n0_db, bler))
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if (y0 - target) * (y1 - target) <= 0 and y0 != y1:
            if y0 <= 0 or y1 <= 0:
                return x1 if y1 == target else None
            t = (math.log10(y0) - math.log10(target)) / \
                (math.log10(y0) - math.log10(y1))
            return x0 + t * (x1 - x0)
    if pts and pts[0][1] <= target:
        return pts[0][0]
    return None


def closest_grid_point(eb_n0_db, bler, target: float) -> float:
    """Grid Eb/N0 whose BLER is nearest the target in log distance."""
    best_x, best_d = None, math.inf
    for x, y in zip(eb_n0_db, bler):
        if y <= 0:
            continue
        d = abs(math.log10(y) - math.log10(target))
        if d < best_d:
            best_x, best_d = float(x), d
    if best_x is None:
        raise ValueError("no nonzero BLER values on the grid")
    return best_x


def db(x: float) -> float:
    return 10.0 * np.log10(x)
