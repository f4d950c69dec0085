"""Complex linear algebra and DFT primitives shared by the whole receiver chain.

Transform convention used everywhere in this package: the forward transform is
unscaled, ``X[k] = sum_n x[n] exp(-j 2 pi n k / N)``, and the inverse carries
the ``1/N`` factor.  With this pairing ``ifft(fft(x)) == x`` and circular
convolution in time maps to a plain product ``H[k] X[k]`` in frequency, where
``H[k] = sum_l h[l] exp(-j 2 pi k l / N)`` uses the same unscaled kernel as
:func:`dft_submatrix`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg


class IllConditionedError(np.linalg.LinAlgError):
    """Raised when an unregularized normal-equation solve is numerically unsafe.

    Retry with ``ridge > 0``.
    """


def _check_power_of_two(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")


def fft(x: np.ndarray) -> np.ndarray:
    """Forward DFT, unscaled. Length must be a power of two."""
    x = np.asarray(x)
    _check_power_of_two(x.shape[-1])
    return np.fft.fft(x)


def ifft(X: np.ndarray) -> np.ndarray:
    """Inverse DFT with the 1/N factor. Length must be a power of two."""
    X = np.asarray(X)
    _check_power_of_two(X.shape[-1])
    return np.fft.ifft(X)


@dataclass(frozen=True)
class DftSubmatrix:
    """Row/column-sampled DFT matrix.

    entry(r, c) = exp(-j 2 pi row_indices[r] * c / n_fft) for the first
    ``n_cols`` columns.  Stacking M copies block-diagonally yields the design
    used by the joint channel estimator.
    """

    n_fft: int
    row_indices: tuple[int, ...]
    n_cols: int
    entries: np.ndarray = field(repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def dft_submatrix(n_fft: int, row_indices, n_cols: int) -> DftSubmatrix:
    """Build the sampled DFT matrix with rows at ``row_indices``.

    Raises ValueError if an index is outside ``[0, n_fft)`` or
    ``n_cols`` is outside ``[1, n_fft]``.
    """
    rows = np.asarray(list(row_indices), dtype=np.int64)
    if rows.size and (rows.min() < 0 or rows.max() >= n_fft):
        raise ValueError("row index out of range [0, n_fft)")
    if not 1 <= n_cols <= n_fft:
        raise ValueError(f"n_cols must be in [1, {n_fft}], got {n_cols}")
    cols = np.arange(n_cols)
    entries = np.exp(-2j * np.pi * rows[:, None] * cols[None, :] / n_fft)
    return DftSubmatrix(n_fft=n_fft, row_indices=tuple(int(r) for r in rows),
                        n_cols=n_cols, entries=entries)


@dataclass(frozen=True)
class RegularizedLsProblem:
    """Ridge least-squares instance: minimize ||y - A x||^2 + ridge ||x||^2."""

    design: np.ndarray
    observation: np.ndarray
    ridge: float = 0.0

    def __post_init__(self):
        if self.design.shape[0] != self.observation.shape[0]:
            raise ValueError("rows(design) must equal len(observation)")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


# Diagonal-pivot ratio of the Cholesky factor beyond which an alpha=0 solve
# is refused instead of returning garbage.
_PIVOT_RATIO_LIMIT = 1e12


def solve_regularized_gram(gram_plus_ridge: np.ndarray, rhs: np.ndarray,
                           unregularized: bool = False) -> np.ndarray:
    """Solve (A^H A + alpha I) x = rhs given the already-assembled left side.

    The matrix is Hermitian positive definite by construction, so a Cholesky
    factorization is used.  When ``unregularized`` the factor's diagonal-pivot
    spread is checked and :class:`IllConditionedError` raised if it exceeds
    1e12 (squared ratio), prescribing a retry with ridge > 0.
    """
    try:
        c, low = scipy.linalg.cho_factor(gram_plus_ridge, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise IllConditionedError(
            "normal equations not positive definite; retry with ridge > 0"
        ) from exc
    if unregularized:
        d = np.abs(np.diag(c))
        if d.min() == 0 or (d.max() / d.min()) ** 2 > _PIVOT_RATIO_LIMIT:
            raise IllConditionedError(
                "Gram matrix ill-conditioned with ridge = 0; retry with ridge > 0"
            )
    return scipy.linalg.cho_solve((c, low), rhs, check_finite=False)


def regularized_ls_solve(problem: RegularizedLsProblem) -> np.ndarray:
    """Ridge LS solution via Cholesky on the regularized normal equations."""
    a = problem.design
    gram = a.conj().T @ a
    if problem.ridge > 0:
        gram = gram + problem.ridge * np.eye(gram.shape[0])
    rhs = a.conj().T @ problem.observation
    return solve_regularized_gram(gram, rhs, unregularized=problem.ridge == 0)
