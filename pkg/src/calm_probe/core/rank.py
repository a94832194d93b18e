"""Tolerance-aware numerical rank."""

import numpy as np
from numpy.typing import ArrayLike

from calm_probe.core.config import DEFAULT_TOLERANCES, RankPolicy, Tolerances


def _echelon_pivots(mat: np.ndarray, threshold: float) -> list[float]:
    work = mat.copy()
    n_rows, n_cols = work.shape
    pivots: list[float] = []
    r = 0
    for col in range(n_cols):
        if r == n_rows:
            break
        best = r + int(np.argmax(np.abs(work[r:, col])))
        if abs(work[best, col]) <= threshold:
            continue
        if best != r:
            work[[r, best]] = work[[best, r]]
        pivot = work[r, col]
        factors = work[r + 1 :, col] / pivot
        work[r + 1 :] -= np.outer(factors, work[r])
        pivots.append(abs(float(pivot)))
        r += 1
    return pivots


def numerical_rank(
    mat: ArrayLike, tol: Tolerances = DEFAULT_TOLERANCES, policy: RankPolicy | None = None
) -> int:
    """
    Rank of a dense matrix under a relative tolerance.

    With the echelon policy the matrix is reduced with partial pivoting
    and pivots smaller than tol.rank times the largest pivot are treated
    as zero. With the SVD policy singular values are compared with
    tol.rank times the largest one. The all-zeros (or empty) matrix has
    rank 0.
    """
    a = np.atleast_2d(np.asarray(mat, dtype=float))
    if a.size == 0:
        return 0
    largest = float(np.max(np.abs(a)))
    if largest == 0.0:
        return 0

    if (policy or tol.rank_policy) == RankPolicy.SVD:
        s = np.linalg.svd(a, compute_uv=False)
        return int(np.sum(s > tol.rank * s[0]))

    pivots = _echelon_pivots(a, tol.rank * largest)
    if not pivots:
        return 0
    top = max(pivots)
    return sum(1 for p in pivots if p > tol.rank * top)
